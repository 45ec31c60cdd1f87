#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "pgsom/autodiff.hpp"
#include "pgsom/base.hpp"
#include "pgsom/rng.hpp"

namespace pgsom {

enum class PolicyKind { SoftmaxLinear, Mlp1h };

// Hidden-layer activation for Mlp1h. Identity exists so tests can configure
// the hidden layer as a passthrough and compare against SoftmaxLinear.
enum class HiddenActivation { Tanh, Identity };

struct PolicySpec {
    PolicyKind kind = PolicyKind::SoftmaxLinear;
    int obs_dim = 0;
    int n_actions = 0;
    int hidden = 0;  // Mlp1h only
    HiddenActivation activation = HiddenActivation::Tanh;

    int param_count() const {
        if (kind == PolicyKind::SoftmaxLinear) return obs_dim * n_actions;
        return obs_dim * hidden + hidden + hidden * n_actions + n_actions;
    }
};

struct LogProbDerivatives {
    double value = 0.0;  // ln pi(a|s), floored at ln(1e-12)
    Vec grad;
    Vec hess_diag;
};

// Probabilities below this are clamped before logs are taken. Derivatives
// stay exact softmax expressions; the floor guards the value only.
inline constexpr double kLogProbFloor = 1e-12;

namespace detail {

inline void check_policy_args(const PolicySpec& spec, const Vec& theta, const Vec& obs) {
    require(spec.obs_dim > 0 && spec.n_actions > 0, "policy: empty spec");
    require(static_cast<int>(obs.size()) == spec.obs_dim, "policy: observation dimension mismatch");
    require(static_cast<int>(theta.size()) == spec.param_count(), "policy: parameter length mismatch");
}

// Parameter layout for Mlp1h, all row-major:
//   [W1 (hidden x obs) | b1 (hidden) | W2 (n_actions x hidden) | b2 (n_actions)]
struct MlpLayout {
    int obs, hid, act;
    int w1(int j, int i) const { return j * obs + i; }
    int b1(int j) const { return hid * obs + j; }
    int w2(int a, int j) const { return hid * obs + hid + a * hid + j; }
    int b2(int a) const { return hid * obs + hid + act * hid + a; }
};

// SoftmaxLinear layout: W (n_actions x obs) row-major, index a*obs + i.

template <class T>
std::vector<T> softmax_of(const std::vector<T>& logits) {
    using std::exp;
    double m = value_of(logits[0]);
    for (const auto& l : logits) m = std::max(m, value_of(l));
    std::vector<T> p(logits.size());
    T denom = T(0.0);
    for (size_t a = 0; a < logits.size(); ++a) {
        p[a] = exp(logits[a] - T(m));
        denom = denom + p[a];
    }
    for (auto& pa : p) pa = pa / denom;
    return p;
}

template <class T>
std::vector<T> forward_logits(const PolicySpec& spec, const T* params, const Vec& obs) {
    using std::tanh;
    if (spec.kind == PolicyKind::SoftmaxLinear) {
        std::vector<T> logits(spec.n_actions, T(0.0));
        for (int a = 0; a < spec.n_actions; ++a)
            for (int i = 0; i < spec.obs_dim; ++i)
                logits[a] = logits[a] + params[a * spec.obs_dim + i] * T(obs[i]);
        return logits;
    }
    const MlpLayout L{spec.obs_dim, spec.hidden, spec.n_actions};
    std::vector<T> h(spec.hidden);
    for (int j = 0; j < spec.hidden; ++j) {
        T z = params[L.b1(j)];
        for (int i = 0; i < spec.obs_dim; ++i) z = z + params[L.w1(j, i)] * T(obs[i]);
        h[j] = spec.activation == HiddenActivation::Tanh ? T(tanh(z)) : z;
    }
    std::vector<T> logits(spec.n_actions);
    for (int a = 0; a < spec.n_actions; ++a) {
        T l = params[L.b2(a)];
        for (int j = 0; j < spec.hidden; ++j) l = l + params[L.w2(a, j)] * h[j];
        logits[a] = l;
    }
    return logits;
}

// Reverse accumulation from d(logits) back to d(params), shared by the
// log-prob and entropy gradients. dlogits has length n_actions.
template <class T>
void backprop_logits(const PolicySpec& spec, const T* params, const Vec& obs,
                     const std::vector<T>& dlogits, T* grad_out) {
    using std::tanh;
    const int D = spec.param_count();
    std::fill(grad_out, grad_out + D, T(0.0));
    if (spec.kind == PolicyKind::SoftmaxLinear) {
        for (int a = 0; a < spec.n_actions; ++a)
            for (int i = 0; i < spec.obs_dim; ++i)
                grad_out[a * spec.obs_dim + i] = dlogits[a] * T(obs[i]);
        return;
    }
    const MlpLayout L{spec.obs_dim, spec.hidden, spec.n_actions};
    std::vector<T> h(spec.hidden);
    for (int j = 0; j < spec.hidden; ++j) {
        T z = params[L.b1(j)];
        for (int i = 0; i < spec.obs_dim; ++i) z = z + params[L.w1(j, i)] * T(obs[i]);
        h[j] = spec.activation == HiddenActivation::Tanh ? T(tanh(z)) : z;
    }
    std::vector<T> dh(spec.hidden, T(0.0));
    for (int a = 0; a < spec.n_actions; ++a) {
        grad_out[L.b2(a)] = dlogits[a];
        for (int j = 0; j < spec.hidden; ++j) {
            grad_out[L.w2(a, j)] = dlogits[a] * h[j];
            dh[j] = dh[j] + dlogits[a] * params[L.w2(a, j)];
        }
    }
    for (int j = 0; j < spec.hidden; ++j) {
        T dz = dh[j];
        if (spec.activation == HiddenActivation::Tanh) dz = dz * (T(1.0) - h[j] * h[j]);
        grad_out[L.b1(j)] = dz;
        for (int i = 0; i < spec.obs_dim; ++i) grad_out[L.w1(j, i)] = dz * T(obs[i]);
    }
}

// value = ln pi(action|obs) and its gradient w.r.t. params, in T arithmetic.
template <class T>
T log_prob_grad_generic(const PolicySpec& spec, const T* params, const Vec& obs,
                        int action, T* grad_out) {
    using std::exp;
    using std::log;
    const auto logits = forward_logits(spec, params, obs);
    double m = value_of(logits[0]);
    for (const auto& l : logits) m = std::max(m, value_of(l));
    T sum = T(0.0);
    for (const auto& l : logits) sum = sum + exp(l - T(m));
    const T lse = T(m) + log(sum);

    const auto p = softmax_of(logits);
    std::vector<T> dlogits(spec.n_actions);
    for (int a = 0; a < spec.n_actions; ++a)
        dlogits[a] = (a == action ? T(1.0) : T(0.0)) - p[a];
    backprop_logits(spec, params, obs, dlogits, grad_out);
    return logits[action] - lse;
}

}  // namespace detail

inline Vec action_distribution(const PolicySpec& spec, const Vec& theta, const Vec& obs) {
    detail::check_policy_args(spec, theta, obs);
    const auto logits = detail::forward_logits<double>(spec, theta.data(), obs);
    double m = *std::max_element(logits.begin(), logits.end());
    Vec p(spec.n_actions);
    double denom = 0.0;
    for (int a = 0; a < spec.n_actions; ++a) {
        // floor keeps entries strictly positive even when exp underflows
        p[a] = std::max(std::exp(logits[a] - m), 1e-300);
        denom += p[a];
    }
    return p / denom;
}

template <class Gen>
int sample_action(const PolicySpec& spec, const Vec& theta, const Vec& obs, Gen& gen) {
    return sample_index(gen, action_distribution(spec, theta, obs));
}

inline double log_prob(const PolicySpec& spec, const Vec& theta, const Vec& obs, int action) {
    detail::check_policy_args(spec, theta, obs);
    require(action >= 0 && action < spec.n_actions, "policy: action out of range");
    const auto logits = detail::forward_logits<double>(spec, theta.data(), obs);
    double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - m);
    const double lse = m + std::log(sum);
    return std::max(logits[action] - lse, std::log(kLogProbFloor));
}

inline LogProbDerivatives log_prob_derivatives(const PolicySpec& spec, const Vec& theta,
                                               const Vec& obs, int action) {
    detail::check_policy_args(spec, theta, obs);
    require(action >= 0 && action < spec.n_actions, "policy: action out of range");
    const int D = spec.param_count();
    LogProbDerivatives out;
    out.grad = Vec::Zero(D);
    out.hess_diag = Vec::Zero(D);

    if (spec.kind == PolicyKind::SoftmaxLinear) {
        const Vec p = action_distribution(spec, theta, obs);
        out.value = log_prob(spec, theta, obs, action);
        for (int a = 0; a < spec.n_actions; ++a) {
            const double da = (a == action ? 1.0 : 0.0) - p[a];
            const double curv = -p[a] * (1.0 - p[a]);
            for (int i = 0; i < spec.obs_dim; ++i) {
                out.grad[a * spec.obs_dim + i] = da * obs[i];
                out.hess_diag[a * spec.obs_dim + i] = curv * obs[i] * obs[i];
            }
        }
        return out;
    }

    // Mlp1h: gradient by reverse accumulation, Hessian diagonal by one
    // forward-over-reverse pass per coordinate (exact at O(D) net passes).
    std::vector<double> grad(D);
    const double value = detail::log_prob_grad_generic<double>(spec, theta.data(), obs, action, grad.data());
    out.value = std::max(value, std::log(kLogProbFloor));
    for (int i = 0; i < D; ++i) out.grad[i] = grad[i];

    std::vector<Dual> params(D);
    std::vector<Dual> dual_grad(D);
    for (int i = 0; i < D; ++i) {
        for (int j = 0; j < D; ++j) params[j] = Dual(theta[j], j == i ? 1.0 : 0.0);
        detail::log_prob_grad_generic<Dual>(spec, params.data(), obs, action, dual_grad.data());
        out.hess_diag[i] = dual_grad[i].d;
    }
    return out;
}

// Value and gradient only; skips the per-coordinate Hessian passes.
inline LogProbDerivatives log_prob_grad(const PolicySpec& spec, const Vec& theta,
                                        const Vec& obs, int action) {
    detail::check_policy_args(spec, theta, obs);
    require(action >= 0 && action < spec.n_actions, "policy: action out of range");
    const int D = spec.param_count();
    LogProbDerivatives out;
    out.hess_diag = Vec();

    if (spec.kind == PolicyKind::SoftmaxLinear) {
        const Vec p = action_distribution(spec, theta, obs);
        out.value = log_prob(spec, theta, obs, action);
        out.grad = Vec::Zero(D);
        for (int a = 0; a < spec.n_actions; ++a) {
            const double da = (a == action ? 1.0 : 0.0) - p[a];
            for (int i = 0; i < spec.obs_dim; ++i)
                out.grad[a * spec.obs_dim + i] = da * obs[i];
        }
        return out;
    }

    std::vector<double> grad(D);
    const double value = detail::log_prob_grad_generic<double>(spec, theta.data(), obs, action, grad.data());
    out.value = std::max(value, std::log(kLogProbFloor));
    out.grad = Vec(D);
    for (int i = 0; i < D; ++i) out.grad[i] = grad[i];
    return out;
}

inline double entropy(const PolicySpec& spec, const Vec& theta, const Vec& obs) {
    const Vec p = action_distribution(spec, theta, obs);
    double h = 0.0;
    for (int a = 0; a < p.size(); ++a)
        h -= p[a] * std::log(std::max(p[a], kLogProbFloor));
    return h;
}

inline Vec entropy_grad(const PolicySpec& spec, const Vec& theta, const Vec& obs) {
    detail::check_policy_args(spec, theta, obs);
    const Vec p = action_distribution(spec, theta, obs);
    const double h = entropy(spec, theta, obs);
    // dH/dlogit_a = -p_a (ln p_a + H)
    std::vector<double> dlogits(spec.n_actions);
    for (int a = 0; a < spec.n_actions; ++a)
        dlogits[a] = -p[a] * (std::log(std::max(p[a], kLogProbFloor)) + h);
    const int D = spec.param_count();
    std::vector<double> grad(D);
    detail::backprop_logits<double>(spec, theta.data(), obs, dlogits, grad.data());
    Vec out(D);
    for (int i = 0; i < D; ++i) out[i] = grad[i];
    return out;
}

// Seeded near-zero initialization: the initial policy is close to uniform.
template <class Gen>
Vec init_params(const PolicySpec& spec, Gen& gen) {
    Vec theta(spec.param_count());
    for (int i = 0; i < theta.size(); ++i) theta[i] = uniform(gen, -0.01, 0.01);
    return theta;
}

inline nlohmann::json params_to_json(const Vec& theta) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < theta.size(); ++i) arr.push_back(theta[i]);
    return arr;
}

inline Vec params_from_json(const nlohmann::json& arr) {
    require(arr.is_array(), "params_from_json: expected an array");
    Vec theta(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) theta[static_cast<int>(i)] = arr[i].get<double>();
    return theta;
}

}  // namespace pgsom
