#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pgsom/env/cartpole.hpp"
#include "pgsom/env/tabular_mdp.hpp"
#include "pgsom/estimator.hpp"
#include "pgsom/optim.hpp"
#include "pgsom/oracle.hpp"
#include "pgsom/stats.hpp"
#include "pgsom/svg.hpp"

namespace pgsom {

enum class Method { Pg, Hessian, Rk };
enum class Stabilizer { None, Clip, Entropy, Baseline };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::Pg: return "pg";
        case Method::Hessian: return "hessian";
        case Method::Rk: return "rk";
    }
    return "?";
}

inline std::string stabilizer_name(Stabilizer s) {
    switch (s) {
        case Stabilizer::None: return "none";
        case Stabilizer::Clip: return "clip";
        case Stabilizer::Entropy: return "entropy";
        case Stabilizer::Baseline: return "baseline";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "pg") return Method::Pg;
    if (s == "hessian") return Method::Hessian;
    if (s == "rk") return Method::Rk;
    throw std::invalid_argument("unknown method: " + s);
}

inline Stabilizer parse_stabilizer(const std::string& s) {
    if (s == "none") return Stabilizer::None;
    if (s == "clip") return Stabilizer::Clip;
    if (s == "entropy") return Stabilizer::Entropy;
    if (s == "baseline") return Stabilizer::Baseline;
    throw std::invalid_argument("unknown stabilizer: " + s);
}

struct RunConfig {
    Method method = Method::Pg;
    Stabilizer stabilizer = Stabilizer::None;
    int episodes = 500;
    std::vector<std::uint64_t> seeds = {7, 8, 9, 10, 11};  // canonical benchmark seeds
    double lr = 0.0;  // 0 resolves to 0.002, or 0.004 under clip
    double clip_norm = 50.0;
    double gamma = 0.99;
    PolicySpec policy{PolicyKind::SoftmaxLinear, 0, 0, 0};  // dims filled from env
    ReturnConvention convention = ReturnConvention::FromStep;
    double entropy_coeff = 0.01;
    double baseline_decay = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double alpha = 0.5;
    double kappa = 0.0;  // 0 resolves to the learning rate
    std::string env = "cartpole";

    double resolved_lr() const {
        if (lr > 0.0) return lr;
        return stabilizer == Stabilizer::Clip ? 0.004 : 0.002;
    }
    double resolved_kappa() const { return kappa > 0.0 ? kappa : resolved_lr(); }

    std::string variant_name() const {
        if (stabilizer == Stabilizer::None) return method_name(method);
        return method_name(method) + "+" + stabilizer_name(stabilizer);
    }

    EstimatorConfig estimator_config() const {
        EstimatorConfig c;
        c.gamma = gamma;
        c.convention = convention;
        c.baseline = stabilizer == Stabilizer::Baseline ? BaselineMode::RunningMean
                                                        : BaselineMode::None;
        c.entropy_coeff = stabilizer == Stabilizer::Entropy ? entropy_coeff : 0.0;
        c.baseline_decay = baseline_decay;
        return c;
    }
};

struct SeedRecord {
    std::uint64_t seed = 0;
    std::vector<double> returns;       // one undiscounted return per episode
    std::vector<double> wall_seconds;  // per episode
    bool diverged = false;
    std::uint64_t updates = 0;
    PassCounters counters;
};

struct RunRecord {
    RunConfig config;
    std::vector<SeedRecord> seeds;

    std::vector<double> final_returns() const {
        std::vector<double> out;
        for (const auto& s : seeds) out.push_back(s.returns.back());
        return out;
    }
    double final_mean() const { return mean_of(final_returns()); }
    double final_std() const { return sample_std(final_returns()); }

    // Median across seeds of the per-seed 10-episode moving-average crossing.
    double episodes_to(double threshold) const {
        std::vector<double> per_seed;
        for (const auto& s : seeds) per_seed.push_back(episodes_to_threshold(s.returns, threshold));
        return median_of(per_seed);
    }

    std::vector<double> mean_curve() const {
        std::vector<double> m(config.episodes, 0.0);
        for (int e = 0; e < config.episodes; ++e) {
            std::vector<double> xs;
            for (const auto& s : seeds) xs.push_back(s.returns[e]);
            m[e] = mean_of(xs);
        }
        return m;
    }
    std::vector<double> std_curve() const {
        std::vector<double> sd(config.episodes, 0.0);
        for (int e = 0; e < config.episodes; ++e) {
            std::vector<double> xs;
            for (const auto& s : seeds) xs.push_back(s.returns[e]);
            sd[e] = sample_std(xs);
        }
        return sd;
    }
};

using AnyEnv = std::variant<CartPoleEnv, TabularEnv>;

inline AnyEnv make_env(const std::string& name) {
    if (name == "cartpole") return CartPoleEnv{};
    if (name.rfind("mdp:", 0) == 0) return TabularEnv{TabularMDP::load(name.substr(4))};
    throw std::invalid_argument("unknown env: " + name + " (expected cartpole or mdp:<path>)");
}

inline int env_obs_dim(const AnyEnv& env) {
    return std::visit([](const auto& e) { return e.obs_dim(); }, env);
}
inline int env_n_actions(const AnyEnv& env) {
    return std::visit([](const auto& e) { return e.n_actions(); }, env);
}

template <class Gen>
Trajectory sample_any(AnyEnv& env, const PolicySpec& spec, const Vec& theta, Gen& gen) {
    return std::visit([&](auto& e) { return sample_trajectory(e, spec, theta, gen); }, env);
}

namespace detail {

inline PolicySpec resolve_policy(const RunConfig& cfg, const AnyEnv& env) {
    PolicySpec spec = cfg.policy;
    if (spec.obs_dim == 0) spec.obs_dim = env_obs_dim(env);
    if (spec.n_actions == 0) spec.n_actions = env_n_actions(env);
    if (spec.kind == PolicyKind::Mlp1h && spec.hidden == 0) spec.hidden = 8;
    return spec;
}

}  // namespace detail

namespace detail {

// One seed of one experiment; owns its env and generator. Runs that go
// non-finite are frozen: the last finite return is recorded for the remaining
// episodes and the seed is flagged diverged.
inline SeedRecord run_one_seed(const RunConfig& cfg, const PolicySpec& spec,
                               std::uint64_t seed) {
    const double lr = cfg.resolved_lr();
    const double kappa = cfg.resolved_kappa();
    const ClipConfig clip{cfg.clip_norm, cfg.stabilizer == Stabilizer::Clip};
    const EstimatorConfig est_cfg = cfg.estimator_config();

    Rng gen(seed);
    AnyEnv env = make_env(cfg.env);

    SeedRecord sr;
    sr.seed = seed;
    Vec theta = init_params(spec, gen);
    SomState som = SomState::init(spec.param_count(), lr, cfg.beta1, cfg.beta2, cfg.epsilon);
    BaselineState baseline;
    double last_return = 0.0;

    for (int episode = 0; episode < cfg.episodes; ++episode) {
        const auto t0 = std::chrono::steady_clock::now();
        if (sr.diverged) {
            sr.returns.push_back(last_return);
            sr.wall_seconds.push_back(0.0);
            continue;
        }
        double episode_return = 0.0;
        try {
            switch (cfg.method) {
                case Method::Pg: {
                    const Trajectory traj = sample_any(env, spec, theta, gen);
                    ++sr.counters.trajectories;
                    episode_return = traj.undiscounted_return();
                    const std::vector<Trajectory> batch{traj};
                    Vec g = grad_estimate(spec, theta, batch, est_cfg, baseline, &sr.counters);
                    g = clip_gradient(g, clip);
                    require(all_finite(g), "non-finite gradient");
                    theta = vanilla_step(theta, g, lr);
                    break;
                }
                case Method::Hessian: {
                    const Trajectory traj = sample_any(env, spec, theta, gen);
                    ++sr.counters.trajectories;
                    episode_return = traj.undiscounted_return();
                    const std::vector<Trajectory> batch{traj};
                    GradEstimate est =
                        estimate(spec, theta, batch, est_cfg, baseline, true, &sr.counters);
                    est.g = clip_gradient(est.g, clip);
                    est.h = clip_gradient(est.h, clip);
                    auto [next_som, next_theta] = pgsom_step(som, theta, est);
                    som = std::move(next_som);
                    theta = std::move(next_theta);
                    break;
                }
                case Method::Rk: {
                    // Stage 1 is the on-policy episode whose return is
                    // recorded; stage 2 rolls out under the lookahead.
                    bool first_stage = true;
                    const auto sampler = [&](const Vec& params) {
                        const Trajectory traj = sample_any(env, spec, params, gen);
                        ++sr.counters.trajectories;
                        if (first_stage) {
                            episode_return = traj.undiscounted_return();
                            first_stage = false;
                        }
                        const std::vector<Trajectory> batch{traj};
                        GradEstimate est;
                        est.g = grad_estimate(spec, params, batch, est_cfg, baseline,
                                              &sr.counters);
                        est.g = clip_gradient(est.g, clip);
                        est.n_trajectories = 1;
                        return est;
                    };
                    theta = rk_round(theta, {cfg.alpha, kappa, lr}, sampler);
                    break;
                }
            }
            ++sr.updates;
            if (!all_finite(theta)) throw std::runtime_error("non-finite parameters");
        } catch (const std::exception&) {
            sr.diverged = true;
        }
        if (!sr.diverged) {
            last_return = episode_return;
            if (cfg.stabilizer == Stabilizer::Baseline)
                baseline = baseline_update(baseline, episode_return, cfg.baseline_decay);
        }
        sr.returns.push_back(last_return);
        sr.wall_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return sr;
}

}  // namespace detail

// One (method, stabilizer) experiment over all configured seeds. Seeds are
// independent (own env, own generator) and run concurrently; results are
// collected in seed order, so the record is identical to a sequential run.
inline RunRecord run_experiment(const RunConfig& cfg) {
    require(cfg.episodes >= 1, "run_experiment: episodes must be >= 1");
    require(!cfg.seeds.empty(), "run_experiment: seeds must be non-empty");
    require(cfg.resolved_lr() > 0.0, "run_experiment: learning rate must be positive");
    RunRecord record;
    record.config = cfg;
    {
        const AnyEnv probe = make_env(cfg.env);
        record.config.policy = detail::resolve_policy(cfg, probe);
    }
    std::vector<std::future<SeedRecord>> futures;
    for (const std::uint64_t seed : cfg.seeds)
        futures.push_back(std::async(std::launch::async, detail::run_one_seed, record.config,
                                     record.config.policy, seed));
    for (auto& f : futures) record.seeds.push_back(f.get());
    return record;
}

// All 12 (method, stabilizer) combinations from a base config, concurrently;
// aggregation order is fixed.
inline std::vector<RunRecord> run_grid(const RunConfig& base) {
    std::vector<std::future<RunRecord>> futures;
    for (const Method m : {Method::Pg, Method::Hessian, Method::Rk})
        for (const Stabilizer s :
             {Stabilizer::None, Stabilizer::Clip, Stabilizer::Entropy, Stabilizer::Baseline}) {
            RunConfig cfg = base;
            cfg.method = m;
            cfg.stabilizer = s;
            futures.push_back(std::async(std::launch::async, run_experiment, cfg));
        }
    std::vector<RunRecord> records;
    for (auto& f : futures) records.push_back(f.get());
    return records;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

}  // namespace detail

// Writes curves.csv, summary.csv, and one learning-curve SVG per variant.
// episodes_to_200 is -1 when the threshold is never reached.
inline void emit_outputs(const std::vector<RunRecord>& records, const std::string& out_dir) {
    require(!records.empty(), "emit_outputs: empty record set");
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);

    {
        std::ofstream out(dir / "curves.csv");
        if (!out) throw std::runtime_error("emit_outputs: cannot write curves.csv");
        out << "method,stabilizer,seed,episode,return\n";
        for (const auto& rec : records)
            for (const auto& sr : rec.seeds)
                for (size_t e = 0; e < sr.returns.size(); ++e)
                    out << method_name(rec.config.method) << ","
                        << stabilizer_name(rec.config.stabilizer) << "," << sr.seed << "," << e + 1
                        << "," << detail::fmt_double(sr.returns[e]) << "\n";
    }
    {
        std::ofstream out(dir / "summary.csv");
        if (!out) throw std::runtime_error("emit_outputs: cannot write summary.csv");
        out << "method,stabilizer,final_mean,final_std,episodes_to_200\n";
        for (const auto& rec : records) {
            const double e200 = rec.episodes_to(200.0);
            out << method_name(rec.config.method) << ","
                << stabilizer_name(rec.config.stabilizer) << ","
                << detail::fmt_double(rec.final_mean()) << "," << detail::fmt_double(rec.final_std())
                << "," << (std::isfinite(e200) ? detail::fmt_double(e200) : "-1") << "\n";
        }
    }
    for (const auto& rec : records) {
        const std::string name =
            "curve_" + method_name(rec.config.method) + "_" +
            stabilizer_name(rec.config.stabilizer) + ".svg";
        write_learning_curve_svg((dir / name).string(), rec.config.variant_name(),
                                 rec.mean_curve(), rec.std_curve());
    }
}

// Ablation summary table: one row per variant, columns model, mean, std.
inline void write_ablation_csv(const std::vector<RunRecord>& records, const std::string& path) {
    require(!records.empty(), "write_ablation_csv: empty record set");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_ablation_csv: cannot write " + path);
    out << "model,mean,std\n";
    for (const auto& rec : records)
        out << rec.config.variant_name() << "," << detail::fmt_double(rec.final_mean()) << ","
            << detail::fmt_double(rec.final_std()) << "\n";
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    if (j.contains("method")) cfg.method = parse_method(j["method"].get<std::string>());
    if (j.contains("stabilizer"))
        cfg.stabilizer = parse_stabilizer(j["stabilizer"].get<std::string>());
    if (j.contains("episodes")) cfg.episodes = j["episodes"].get<int>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
    if (j.contains("clip_norm")) cfg.clip_norm = j["clip_norm"].get<double>();
    if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
    if (j.contains("policy")) {
        const auto& p = j["policy"];
        if (p.contains("kind"))
            cfg.policy.kind = p["kind"].get<std::string>() == "mlp-1h" ? PolicyKind::Mlp1h
                                                                       : PolicyKind::SoftmaxLinear;
        if (p.contains("hidden")) cfg.policy.hidden = p["hidden"].get<int>();
    }
    if (j.contains("convention"))
        cfg.convention = j["convention"].get<std::string>() == "from-start"
                             ? ReturnConvention::FromStart
                             : ReturnConvention::FromStep;
    if (j.contains("entropy_coeff")) cfg.entropy_coeff = j["entropy_coeff"].get<double>();
    if (j.contains("baseline_decay")) cfg.baseline_decay = j["baseline_decay"].get<double>();
    if (j.contains("beta1")) cfg.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) cfg.beta2 = j["beta2"].get<double>();
    if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("kappa")) cfg.kappa = j["kappa"].get<double>();
    if (j.contains("env")) cfg.env = j["env"].get<std::string>();
    return cfg;
}

}  // namespace pgsom
