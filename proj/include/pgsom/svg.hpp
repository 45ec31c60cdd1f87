#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgsom {

// Minimal learning-curve plot: mean line over episodes with a +/- 1 std band.
inline void write_learning_curve_svg(const std::string& path, const std::string& title,
                                     const std::vector<double>& mean,
                                     const std::vector<double>& stddev) {
    if (mean.empty() || mean.size() != stddev.size())
        throw std::invalid_argument("write_learning_curve_svg: bad series");

    const double width = 720.0, height = 440.0;
    const double ml = 64.0, mr = 20.0, mt = 40.0, mb = 48.0;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double y_max = 1.0;
    for (size_t i = 0; i < mean.size(); ++i) y_max = std::max(y_max, mean[i] + stddev[i]);
    y_max *= 1.05;
    const double x_max = static_cast<double>(mean.size());

    auto px = [&](double episode) { return ml + pw * (episode / x_max); };
    auto py = [&](double value) { return mt + ph * (1.0 - std::clamp(value, 0.0, y_max) / y_max); };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_learning_curve_svg: cannot write " + path);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // band polygon: upper edge forward, lower edge backward
    out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (size_t i = 0; i < mean.size(); ++i)
        out << fmt(px(static_cast<double>(i + 1))) << "," << fmt(py(mean[i] + stddev[i])) << " ";
    for (size_t i = mean.size(); i-- > 0;)
        out << fmt(px(static_cast<double>(i + 1))) << "," << fmt(py(mean[i] - stddev[i])) << " ";
    out << "\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < mean.size(); ++i)
        out << fmt(px(static_cast<double>(i + 1))) << "," << fmt(py(mean[i])) << " ";
    out << "\"/>\n";

    // axes with a few ticks
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xe = x_max * k / 4.0;
        const double yv = y_max * k / 4.0;
        out << "<text x=\"" << fmt(px(xe)) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << static_cast<long>(xe) << "</text>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(py(yv) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << static_cast<long>(yv) << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">episode</text>\n";
    out << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">return</text>\n";
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write_learning_curve_svg: write failed for " + path);
}

}  // namespace pgsom
