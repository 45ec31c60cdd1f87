// Experiment CLI: single runs, the 12-variant ablation grid, and the oracle
// audit suite. See README.md for usage.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgsom/audit.hpp"
#include "pgsom/harness.hpp"

namespace {

void print_run_summary(const pgsom::RunRecord& rec) {
    std::uint64_t trajectories = 0, derivative_passes = 0, updates = 0;
    for (const auto& sr : rec.seeds) {
        trajectories += sr.counters.trajectories;
        derivative_passes += sr.counters.grad_passes + sr.counters.hess_passes;
        updates += sr.updates;
    }
    int diverged = 0;
    for (const auto& sr : rec.seeds) diverged += sr.diverged ? 1 : 0;
    const double e200 = rec.episodes_to(200.0);
    std::printf("%-18s final %8.2f +/- %7.2f   episodes_to_200 %s   updates %llu  trajectories %llu  derivative_passes %llu%s\n",
                rec.config.variant_name().c_str(), rec.final_mean(), rec.final_std(),
                std::isfinite(e200) ? std::to_string(static_cast<long>(e200)).c_str() : "never",
                static_cast<unsigned long long>(updates),
                static_cast<unsigned long long>(trajectories),
                static_cast<unsigned long long>(derivative_passes),
                diverged > 0 ? ("  [" + std::to_string(diverged) + " seed(s) diverged]").c_str() : "");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pgsom-lab: policy-gradient optimization experiments"};

    std::string config_path, method, stabilizer, env, out_dir = "out", seeds_arg;
    int episodes = -1;
    double lr = -1.0;
    bool do_audit = false, do_grid = false;

    app.add_option("--config", config_path, "JSON config file (flags override fields)");
    app.add_option("--method", method, "pg | hessian | rk");
    app.add_option("--stabilizer", stabilizer, "none | clip | entropy | baseline");
    app.add_option("--episodes", episodes, "episodes per seed");
    app.add_option("--seeds", seeds_arg, "comma-separated seed list, e.g. 1,2,3,4,5");
    app.add_option("--lr", lr, "learning rate (default 0.002; 0.004 under clip)");
    app.add_option("--env", env, "cartpole | mdp:<path-to-json>");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--audit", do_audit, "run the oracle audit suite and exit 0/1");
    app.add_flag("--grid", do_grid, "run the full 12-variant grid");
    CLI11_PARSE(app, argc, argv);

    try {
        if (do_audit) {
            const pgsom::AuditReport report = pgsom::run_audit();
            std::filesystem::create_directories(out_dir);
            const std::string path = (std::filesystem::path(out_dir) / "audit.json").string();
            pgsom::write_audit_report(report, path);
            for (const auto& c : report.checks)
                std::printf("%-38s %s  (max_abs_error %.3e, tolerance %.3e)\n", c.name.c_str(),
                            c.pass ? "PASS" : "FAIL", c.max_abs_error, c.tolerance);
            std::printf("audit report written to %s\n", path.c_str());
            return report.all_pass() ? 0 : 1;
        }

        pgsom::RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config " + config_path);
            nlohmann::json j;
            in >> j;
            cfg = pgsom::config_from_json(j);
        }
        if (!method.empty()) cfg.method = pgsom::parse_method(method);
        if (!stabilizer.empty()) cfg.stabilizer = pgsom::parse_stabilizer(stabilizer);
        if (episodes > 0) cfg.episodes = episodes;
        if (lr > 0.0) cfg.lr = lr;
        if (!env.empty()) cfg.env = env;
        if (!seeds_arg.empty()) {
            cfg.seeds.clear();
            std::stringstream ss(seeds_arg);
            std::string token;
            while (std::getline(ss, token, ',')) cfg.seeds.push_back(std::stoull(token));
        }

        std::vector<pgsom::RunRecord> records;
        if (do_grid) {
            records = pgsom::run_grid(cfg);
        } else {
            records.push_back(pgsom::run_experiment(cfg));
        }
        pgsom::emit_outputs(records, out_dir);
        if (do_grid)
            pgsom::write_ablation_csv(records,
                                      (std::filesystem::path(out_dir) / "ablation.csv").string());
        for (const auto& rec : records) print_run_summary(rec);
        std::printf("outputs written to %s\n", out_dir.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
