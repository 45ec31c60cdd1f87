#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pgsom {

inline double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

// Sample standard deviation (n-1 in the denominator); 0 for fewer than two
// values.
inline double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double median_of(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// First 1-based episode e (e >= window) whose trailing `window`-episode mean
// reaches the threshold; +inf when never reached.
inline double episodes_to_threshold(const std::vector<double>& returns, double threshold,
                                    int window = 10) {
    if (static_cast<int>(returns.size()) < window || window < 1)
        return std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (int i = 0; i < window; ++i) acc += returns[i];
    if (acc / window >= threshold) return window;
    for (size_t e = window; e < returns.size(); ++e) {
        acc += returns[e] - returns[e - window];
        if (acc / window >= threshold) return static_cast<double>(e + 1);
    }
    return std::numeric_limits<double>::infinity();
}

}  // namespace pgsom
