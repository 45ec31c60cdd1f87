#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "pgsom/base.hpp"
#include "pgsom/estimator.hpp"

namespace pgsom {

struct SomState {
    // Bias-corrected moments. Stored in corrected form and advanced by the
    // algebraically equivalent recurrence m <- m + w*(est - m) with
    // w = (1-beta)/(1-beta^t), which keeps two identities exact in floating
    // point: the first step copies the raw estimate bitwise, and a constant
    // estimate stream is a fixed point at every t.
    Vec g;  // first-moment EMA (bias-corrected)
    Vec h;  // curvature EMA (bias-corrected)
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eta = 0.002;
    double epsilon = 1e-8;

    static SomState init(int dim, double eta, double beta1 = 0.9, double beta2 = 0.999,
                         double epsilon = 1e-8) {
        SomState s;
        s.g = Vec::Zero(dim);
        s.h = Vec::Zero(dim);
        s.beta1 = beta1;
        s.beta2 = beta2;
        s.eta = eta;
        s.epsilon = epsilon;
        return s;
    }
};

struct RkConfig {
    double alpha = 0.5;  // convex mixing of the two stage gradients
    double kappa = 0.002;  // lookahead step scale
    double eta = 0.002;
};

struct ClipConfig {
    double max_norm = 50.0;
    bool enabled = true;
};

// One PG-SOM update (ascent). The curvature magnitude preconditions the
// bias-corrected gradient EMA elementwise: theta + eta * g_hat / (|h_hat| + eps).
inline std::pair<SomState, Vec> pgsom_step(const SomState& state, const Vec& theta,
                                           const GradEstimate& est) {
    require(est.g.size() == theta.size() && est.h.size() == theta.size(),
            "pgsom_step: estimate dimension mismatch");
    require(all_finite(est.g) && all_finite(est.h), "pgsom_step: non-finite estimate");

    SomState next = state;
    next.t = state.t + 1;
    const double w1 =
        (1.0 - state.beta1) / (1.0 - std::pow(state.beta1, static_cast<double>(next.t)));
    const double w2 =
        (1.0 - state.beta2) / (1.0 - std::pow(state.beta2, static_cast<double>(next.t)));
    next.g = state.g + w1 * (est.g - state.g);
    next.h = state.h + w2 * (est.h - state.h);

    Vec updated = theta;
    for (int i = 0; i < theta.size(); ++i)
        updated[i] = theta[i] + state.eta * (next.g[i] / (std::abs(next.h[i]) + state.epsilon));
    return {std::move(next), std::move(updated)};
}

// Two-stage Runge-Kutta round. The sampler must draw fresh on-policy
// trajectories at whatever parameters it is handed; stage 2 therefore
// evaluates the gradient under the lookahead policy.
inline Vec rk_round(const Vec& theta, const RkConfig& config,
                    const std::function<GradEstimate(const Vec&)>& sampler) {
    const GradEstimate e1 = sampler(theta);
    require(e1.g.size() == theta.size(), "rk_round: stage-1 dimension mismatch");
    require(all_finite(e1.g), "rk_round: non-finite stage-1 estimate");
    const Vec lookahead = theta + config.kappa * e1.g;
    const GradEstimate e2 = sampler(lookahead);
    require(e2.g.size() == theta.size(), "rk_round: stage-2 dimension mismatch");
    require(all_finite(e2.g), "rk_round: non-finite stage-2 estimate");
    return theta + config.eta * (config.alpha * e1.g + (1.0 - config.alpha) * e2.g);
}

inline Vec clip_gradient(const Vec& g, const ClipConfig& config) {
    if (!config.enabled) return g;
    const double norm = g.norm();
    if (norm <= config.max_norm) return g;
    return g * (config.max_norm / norm);
}

inline Vec vanilla_step(const Vec& theta, const Vec& g, double eta) {
    require(g.size() == theta.size(), "vanilla_step: dimension mismatch");
    return theta + eta * g;
}

}  // namespace pgsom
