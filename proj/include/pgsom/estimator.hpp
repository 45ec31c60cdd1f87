#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgsom/base.hpp"
#include "pgsom/policy.hpp"
#include "pgsom/trajectory.hpp"

namespace pgsom {

// FromStart weights each step h by sum_{t>=h} gamma^t r_t (unbiased for the
// discounted objective; the oracle audits pin this one). FromStep weights by
// sum_{t>=h} gamma^{t-h} r_t, the usual returns-to-go used in training.
enum class ReturnConvention { FromStart, FromStep };

enum class BaselineMode { None, RunningMean };

struct EstimatorConfig {
    double gamma = 0.99;
    ReturnConvention convention = ReturnConvention::FromStep;
    BaselineMode baseline = BaselineMode::None;
    double entropy_coeff = 0.0;
    double baseline_decay = 0.9;
};

struct BaselineState {
    double running_mean = 0.0;
    bool initialized = false;
};

struct GradEstimate {
    Vec g;
    Vec h;
    int n_trajectories = 0;
};

// Derivative-pass instrumentation. One grad pass = one gradient estimate over
// a batch; one hess pass = one diagonal-Hessian estimate over a batch.
struct PassCounters {
    std::uint64_t grad_passes = 0;
    std::uint64_t hess_passes = 0;
    std::uint64_t trajectories = 0;
};

inline Vec returns_to_go(const Vec& rewards, double gamma, ReturnConvention convention) {
    require(rewards.size() > 0, "returns_to_go: empty reward sequence");
    const int n = static_cast<int>(rewards.size());
    Vec g(n);
    if (convention == ReturnConvention::FromStep) {
        double acc = 0.0;
        for (int t = n - 1; t >= 0; --t) {
            acc = rewards[t] + gamma * acc;
            g[t] = acc;
        }
    } else {
        // suffix sums of gamma^t r_t
        std::vector<double> w(n);
        double p = 1.0;
        for (int t = 0; t < n; ++t) {
            w[t] = p * rewards[t];
            p *= gamma;
        }
        double acc = 0.0;
        for (int t = n - 1; t >= 0; --t) {
            acc += w[t];
            g[t] = acc;
        }
    }
    return g;
}

inline Vec returns_to_go(const Trajectory& traj, double gamma, ReturnConvention convention) {
    require(!traj.empty(), "returns_to_go: empty trajectory");
    Vec rewards(traj.size());
    for (int t = 0; t < traj.size(); ++t) rewards[t] = traj.steps[t].reward;
    return returns_to_go(rewards, gamma, convention);
}

struct PsiDerivatives {
    double psi = 0.0;
    Vec grad;
    Vec hess_diag;
};

namespace detail {

inline Vec psi_weights(const Trajectory& traj, const EstimatorConfig& config,
                       const BaselineState& baseline) {
    Vec w = returns_to_go(traj, config.gamma, config.convention);
    if (config.baseline == BaselineMode::RunningMean && baseline.initialized)
        w.array() -= baseline.running_mean;
    return w;
}

inline PsiDerivatives psi_accumulate(const PolicySpec& spec, const Vec& theta,
                                     const Trajectory& traj, const EstimatorConfig& config,
                                     const BaselineState& baseline, bool want_hess) {
    const int D = spec.param_count();
    const Vec w = psi_weights(traj, config, baseline);
    PsiDerivatives out;
    out.grad = Vec::Zero(D);
    out.hess_diag = Vec::Zero(D);
    for (int h = 0; h < traj.size(); ++h) {
        const auto& st = traj.steps[h];
        if (want_hess) {
            const auto d = log_prob_derivatives(spec, theta, st.obs, st.action);
            out.psi += w[h] * d.value;
            out.grad += w[h] * d.grad;
            out.hess_diag += w[h] * d.hess_diag;
        } else {
            const auto d = log_prob_grad(spec, theta, st.obs, st.action);
            out.psi += w[h] * d.value;
            out.grad += w[h] * d.grad;
        }
    }
    return out;
}

}  // namespace detail

// Psi(theta; tau) = sum_h w_h ln pi_theta(a_h|s_h) and its exact first and
// diagonal-second derivatives. Weights are treated as theta-independent.
inline PsiDerivatives psi_derivatives(const PolicySpec& spec, const Vec& theta,
                                      const Trajectory& traj, const EstimatorConfig& config,
                                      const BaselineState& baseline = {}) {
    return detail::psi_accumulate(spec, theta, traj, config, baseline, true);
}

// Gradient of the trajectory log-density: sum of per-step score vectors.
// Never reads environment dynamics.
inline Vec score(const PolicySpec& spec, const Vec& theta, const Trajectory& traj) {
    Vec s = Vec::Zero(spec.param_count());
    for (const auto& st : traj.steps) s += log_prob_grad(spec, theta, st.obs, st.action).grad;
    return s;
}

inline Vec grad_estimate(const PolicySpec& spec, const Vec& theta,
                         std::span<const Trajectory> trajs, const EstimatorConfig& config,
                         const BaselineState& baseline = {}, PassCounters* counters = nullptr) {
    require(!trajs.empty(), "grad_estimate: empty batch");
    if (counters) ++counters->grad_passes;
    const int D = spec.param_count();
    Vec g = Vec::Zero(D);
    for (const auto& traj : trajs)
        g += detail::psi_accumulate(spec, theta, traj, config, baseline, false).grad;
    g /= static_cast<double>(trajs.size());

    if (config.entropy_coeff > 0.0) {
        Vec eg = Vec::Zero(D);
        std::int64_t n_steps = 0;
        for (const auto& traj : trajs)
            for (const auto& st : traj.steps) {
                eg += entropy_grad(spec, theta, st.obs);
                ++n_steps;
            }
        if (n_steps > 0) g += config.entropy_coeff * (eg / static_cast<double>(n_steps));
    }
    return g;
}

inline Vec hess_diag_estimate(const PolicySpec& spec, const Vec& theta,
                              std::span<const Trajectory> trajs, const EstimatorConfig& config,
                              const BaselineState& baseline = {}, PassCounters* counters = nullptr) {
    require(!trajs.empty(), "hess_diag_estimate: empty batch");
    if (counters) ++counters->hess_passes;
    const int D = spec.param_count();
    Vec h = Vec::Zero(D);
    for (const auto& traj : trajs) {
        const auto psi = detail::psi_accumulate(spec, theta, traj, config, baseline, true);
        const Vec sc = score(spec, theta, traj);
        h += psi.hess_diag + sc.cwiseProduct(psi.grad);
    }
    return h / static_cast<double>(trajs.size());
}

inline GradEstimate estimate(const PolicySpec& spec, const Vec& theta,
                             std::span<const Trajectory> trajs, const EstimatorConfig& config,
                             const BaselineState& baseline = {}, bool want_hessian = false,
                             PassCounters* counters = nullptr) {
    GradEstimate est;
    est.g = grad_estimate(spec, theta, trajs, config, baseline, counters);
    if (want_hessian) est.h = hess_diag_estimate(spec, theta, trajs, config, baseline, counters);
    est.n_trajectories = static_cast<int>(trajs.size());
    return est;
}

inline BaselineState baseline_update(BaselineState state, double episode_return, double decay) {
    if (!state.initialized) return {episode_return, true};
    return {decay * state.running_mean + (1.0 - decay) * episode_return, true};
}

inline BaselineState baseline_update(BaselineState state, const Trajectory& traj, double decay) {
    return baseline_update(state, traj.undiscounted_return(), decay);
}

}  // namespace pgsom
