#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgsom/oracle.hpp"
#include "pgsom/rng.hpp"

namespace pgsom {

struct AuditCheck {
    std::string name;
    double max_abs_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

struct AuditReport {
    std::vector<AuditCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json jc{{"name", c.name},
                              {"max_abs_error", c.max_abs_error},
                              {"tolerance", c.tolerance},
                              {"pass", c.pass}};
            if (!c.note.empty()) jc["note"] = c.note;
            arr.push_back(jc);
        }
        return nlohmann::json{{"checks", arr}, {"all_pass", all_pass()}};
    }
};

// Default audit fixture: 2 states, 2 actions, H = 3, stochastic everywhere.
inline TabularMDP make_audit_fixture() {
    TabularMDP mdp;
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.horizon = 3;
    mdp.gamma = 0.9;
    mdp.transition.resize(2);
    mdp.transition[0] = Mat(2, 2);
    mdp.transition[0] << 0.7, 0.3,
                         0.2, 0.8;
    mdp.transition[1] = Mat(2, 2);
    mdp.transition[1] << 0.4, 0.6,
                         0.9, 0.1;
    mdp.reward = Mat(2, 2);
    mdp.reward << 1.0, -0.5,
                  0.25, 2.0;
    mdp.initial_dist = Vec(2);
    mdp.initial_dist << 0.6, 0.4;
    mdp.validate();
    return mdp;
}

template <class Gen>
TabularMDP random_mdp(Gen& gen, int n_states, int n_actions, int horizon, double gamma) {
    TabularMDP mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.horizon = horizon;
    mdp.gamma = gamma;
    mdp.transition.resize(n_states);
    for (int s = 0; s < n_states; ++s) {
        mdp.transition[s] = Mat(n_actions, n_states);
        for (int a = 0; a < n_actions; ++a) {
            double sum = 0.0;
            for (int next = 0; next < n_states; ++next) {
                mdp.transition[s](a, next) = uniform(gen, 0.05, 1.0);
                sum += mdp.transition[s](a, next);
            }
            for (int next = 0; next < n_states; ++next) mdp.transition[s](a, next) /= sum;
        }
    }
    mdp.reward = Mat(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) mdp.reward(s, a) = uniform(gen, -1.0, 1.0);
    mdp.initial_dist = Vec(n_states);
    double sum = 0.0;
    for (int s = 0; s < n_states; ++s) {
        mdp.initial_dist[s] = uniform(gen, 0.05, 1.0);
        sum += mdp.initial_dist[s];
    }
    mdp.initial_dist /= sum;
    mdp.validate();
    return mdp;
}

inline PolicySpec tabular_policy_spec(const TabularMDP& mdp) {
    return {PolicyKind::SoftmaxLinear, mdp.n_states, mdp.n_actions, 0};
}

template <class Gen>
Vec random_theta(const PolicySpec& spec, Gen& gen, double scale = 0.8) {
    Vec theta(spec.param_count());
    for (int i = 0; i < theta.size(); ++i) theta[i] = uniform(gen, -scale, scale);
    return theta;
}

inline EstimatorConfig oracle_estimator_config(const TabularMDP& mdp) {
    EstimatorConfig config;
    config.gamma = mdp.gamma;
    config.convention = ReturnConvention::FromStart;
    config.baseline = BaselineMode::None;
    config.entropy_coeff = 0.0;
    return config;
}

using HessDiagEstimator = std::function<Vec(const PolicySpec&, const Vec&, const Trajectory&)>;

inline Vec default_hess_diag_estimator(const PolicySpec& spec, const Vec& theta,
                                       const Trajectory& traj, const EstimatorConfig& config) {
    const auto psi = psi_derivatives(spec, theta, traj, config);
    return psi.hess_diag + score(spec, theta, traj).cwiseProduct(psi.grad);
}

// Diagonal-Hessian unbiasedness audit: enumerated expectation of the supplied
// per-trajectory estimator against finite differences of the exact return.
// The estimator argument exists so tests can inject a corrupted one.
inline AuditCheck audit_hess_diag_unbiasedness(const TabularMDP& mdp, const PolicySpec& spec,
                                               const std::vector<Vec>& thetas,
                                               const HessDiagEstimator& estimator,
                                               double tolerance = 1e-5, double fd_step = 1e-3) {
    double worst = 0.0;
    for (const auto& theta : thetas) {
        const Vec expected = estimator_expectation(
            mdp, spec, theta,
            [&](const Trajectory& traj) { return estimator(spec, theta, traj); });
        const Vec fd = fd_hessian_diag(mdp, spec, theta, fd_step);
        worst = std::max(worst, (expected - fd).cwiseAbs().maxCoeff());
    }
    return {"hess_diag_unbiasedness", worst, tolerance, worst < tolerance, ""};
}

inline AuditReport run_audit(std::uint64_t seed = 20240901) {
    AuditReport report;
    Rng gen(seed);

    const TabularMDP fixture = make_audit_fixture();
    const PolicySpec spec = tabular_policy_spec(fixture);
    const auto config = oracle_estimator_config(fixture);

    std::vector<Vec> thetas;
    for (int k = 0; k < 20; ++k) thetas.push_back(random_theta(spec, gen));

    {  // enumeration densities sum to one
        double worst = 0.0;
        for (const auto& theta : thetas) {
            const auto paths = enumerate_trajectories(fixture, spec, theta);
            double total = 0.0;
            for (const auto& et : paths) total += et.probability;
            worst = std::max(worst, std::abs(total - 1.0));
        }
        report.checks.push_back({"enumeration_probability_sum", worst, 1e-10, worst < 1e-10, ""});
    }

    {  // backward induction agrees with the enumeration sum
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const TabularMDP mdp = random_mdp(gen, 2, 2, 3, uniform(gen, 0.5, 1.0));
            const PolicySpec s2 = tabular_policy_spec(mdp);
            const Vec theta = random_theta(s2, gen);
            const double j_induction = exact_return(mdp, s2, theta);
            double j_enum = 0.0;
            for (const auto& et : enumerate_trajectories(mdp, s2, theta)) {
                double ret = 0.0, disc = 1.0;
                for (int t = 0; t < et.rewards.size(); ++t) {
                    ret += disc * et.rewards[t];
                    disc *= mdp.gamma;
                }
                j_enum += et.probability * ret;
            }
            worst = std::max(worst, std::abs(j_induction - j_enum));
        }
        report.checks.push_back({"exact_return_vs_enumeration", worst, 1e-10, worst < 1e-10, ""});
    }

    {  // occupancy-weighted per-step decomposition reproduces J
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const int n_states = 2 + static_cast<int>(uniform01(gen) * 2.0);  // 2 or 3
            const TabularMDP mdp = random_mdp(gen, n_states, 2, 3, uniform(gen, 0.5, 1.0));
            const PolicySpec s2 = tabular_policy_spec(mdp);
            const Vec theta = random_theta(s2, gen);
            const auto tables = value_tables(mdp, s2, theta);
            worst = std::max(worst, std::abs(tables.j_from_occupancy - exact_return(mdp, s2, theta)));
        }
        report.checks.push_back({"eq1_occupancy_consistency", worst, 1e-10, worst < 1e-10, ""});
    }

    {  // V_t = sum_a pi Q_t and sum_a pi (Q_t - V_t) = 0
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            const TabularMDP mdp = random_mdp(gen, 3, 2, 3, uniform(gen, 0.5, 1.0));
            const PolicySpec s2 = tabular_policy_spec(mdp);
            const Vec theta = random_theta(s2, gen);
            const auto tables = value_tables(mdp, s2, theta);
            for (int t = 0; t < mdp.horizon; ++t)
                for (int s = 0; s < mdp.n_states; ++s) {
                    const Vec pi = action_distribution(s2, theta, one_hot(s, mdp.n_states));
                    double v_from_q = 0.0, centered = 0.0;
                    for (int a = 0; a < mdp.n_actions; ++a) {
                        v_from_q += pi[a] * tables.q[t](s, a);
                        centered += pi[a] * (tables.q[t](s, a) - tables.v[t][s]);
                    }
                    worst = std::max(worst, std::abs(v_from_q - tables.v[t][s]));
                    worst = std::max(worst, std::abs(centered));
                }
        }
        report.checks.push_back({"advantage_centering", worst, 1e-12, worst < 1e-12, ""});
    }

    {  // E[score] = 0
        double worst = 0.0;
        for (const auto& theta : thetas) {
            const Vec expected = estimator_expectation(
                fixture, spec, theta,
                [&](const Trajectory& traj) { return score(spec, theta, traj); });
            worst = std::max(worst, expected.cwiseAbs().maxCoeff());
        }
        report.checks.push_back({"expected_score_zero", worst, 1e-10, worst < 1e-10, ""});
    }

    {  // E[grad_psi] matches finite-difference grad of exact J
        double worst = 0.0;
        for (const auto& theta : thetas) {
            const Vec expected = estimator_expectation(
                fixture, spec, theta, [&](const Trajectory& traj) {
                    return psi_derivatives(spec, theta, traj, config).grad;
                });
            const Vec fd = fd_gradient(fixture, spec, theta, 1e-5);
            worst = std::max(worst, (expected - fd).cwiseAbs().maxCoeff());
        }
        report.checks.push_back({"grad_unbiasedness", worst, 1e-6, worst < 1e-6, ""});
    }

    report.checks.push_back(audit_hess_diag_unbiasedness(
        fixture, spec, thetas,
        [&](const PolicySpec& s, const Vec& theta, const Trajectory& traj) {
            return default_hess_diag_estimator(s, theta, traj, config);
        }));

    {  // score vectors do not depend on the transition kernel
        TabularMDP swapped = make_audit_fixture();
        std::swap(swapped.transition[0], swapped.transition[1]);
        swapped.validate();
        const Vec theta = thetas.front();
        const auto paths_a = enumerate_trajectories(fixture, spec, theta);
        const auto paths_b = enumerate_trajectories(swapped, spec, theta);
        // Index paths by their (state, action) sequence.
        auto key = [](const EnumeratedTrajectory& et) {
            std::string k;
            for (size_t h = 0; h < et.actions.size(); ++h)
                k += std::to_string(et.states[h]) + ":" + std::to_string(et.actions[h]) + ";";
            return k;
        };
        std::vector<std::pair<std::string, Vec>> scores_a;
        for (const auto& et : paths_a)
            scores_a.emplace_back(key(et), score(spec, theta, to_trajectory(fixture, et, spec, theta)));

        const std::uint64_t reads_before = fixture.kernel_reads + swapped.kernel_reads;
        double worst = 0.0;
        for (const auto& et : paths_b) {
            const Vec sb = score(spec, theta, to_trajectory(swapped, et, spec, theta));
            const std::string kb = key(et);
            for (const auto& [ka, sa] : scores_a)
                if (ka == kb) worst = std::max(worst, (sa - sb).cwiseAbs().maxCoeff());
        }
        const std::uint64_t reads_during = fixture.kernel_reads + swapped.kernel_reads - reads_before;
        const double err = std::max(worst, static_cast<double>(reads_during));
        report.checks.push_back({"kernel_independence", err, 0.0, err <= 0.0,
                                 "score computed on fixed trajectories; kernel reads during "
                                 "estimation: " + std::to_string(reads_during)});
    }

    {  // report-only: sign pattern of the expected diagonal-Hessian estimate
        int negative = 0, total = 0;
        for (const auto& theta : thetas) {
            const Vec expected = estimator_expectation(
                fixture, spec, theta, [&](const Trajectory& traj) {
                    return default_hess_diag_estimator(spec, theta, traj, config);
                });
            for (int i = 0; i < expected.size(); ++i) {
                if (expected[i] < 0.0) ++negative;
                ++total;
            }
        }
        const double frac = total > 0 ? static_cast<double>(negative) / total : 0.0;
        report.checks.push_back(
            {"hess_diag_expectation_sign_pattern", frac, 1.0, true,
             std::to_string(negative) + "/" + std::to_string(total) +
                 " coordinates of E[diag Hessian] negative across test points; "
                 "positivity is reported, not asserted"});
    }

    return report;
}

inline void write_audit_report(const AuditReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_audit_report: cannot write " + path);
    out << report.to_json().dump(2) << "\n";
}

}  // namespace pgsom
