#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgsom/base.hpp"
#include "pgsom/env/tabular_mdp.hpp"
#include "pgsom/estimator.hpp"
#include "pgsom/policy.hpp"
#include "pgsom/trajectory.hpp"

namespace pgsom {

inline constexpr double kEnumerationCap = 1e6;

struct EnumeratedTrajectory {
    std::vector<int> states;   // length H+1
    std::vector<int> actions;  // length H
    Vec rewards;               // length H
    double probability = 0.0;

    // Per-step G weights for the surrogate Psi.
    Vec return_weights(double gamma, ReturnConvention convention) const {
        return returns_to_go(rewards, gamma, convention);
    }
};

namespace detail {

inline void check_enumerable(const TabularMDP& mdp, double cap) {
    const double paths =
        std::pow(static_cast<double>(mdp.n_states) * mdp.n_actions, mdp.horizon);
    if (paths > cap)
        throw std::runtime_error("enumerate: (n_states*n_actions)^H = " + std::to_string(paths) +
                                 " exceeds cap " + std::to_string(cap));
}

inline std::vector<Vec> state_action_dists(const TabularMDP& mdp, const PolicySpec& spec,
                                           const Vec& theta) {
    std::vector<Vec> dists(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s)
        dists[s] = action_distribution(spec, theta, one_hot(s, mdp.n_states));
    return dists;
}

}  // namespace detail

// Every length-H trajectory with nonzero probability, exactly once, with its
// exact density rho(s0) * prod_h pi(a_h|s_h) P(s_{h+1}|s_h,a_h).
inline std::vector<EnumeratedTrajectory> enumerate_trajectories(const TabularMDP& mdp,
                                                                const PolicySpec& spec,
                                                                const Vec& theta,
                                                                double cap = kEnumerationCap) {
    detail::check_enumerable(mdp, cap);
    const auto dists = detail::state_action_dists(mdp, spec, theta);

    std::vector<EnumeratedTrajectory> out;
    EnumeratedTrajectory cur;
    cur.states.resize(mdp.horizon + 1);
    cur.actions.resize(mdp.horizon);
    cur.rewards = Vec::Zero(mdp.horizon);

    const std::function<void(int, double)> walk = [&](int depth, double prob) {
        if (depth == mdp.horizon) {
            cur.probability = prob;
            out.push_back(cur);
            return;
        }
        const int s = cur.states[depth];
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double pa = dists[s][a];
            if (pa <= 0.0) continue;
            cur.actions[depth] = a;
            cur.rewards[depth] = mdp.reward_at(s, a);
            for (int next = 0; next < mdp.n_states; ++next) {
                const double pt = mdp.transition_prob(s, a, next);
                if (pt <= 0.0) continue;
                cur.states[depth + 1] = next;
                walk(depth + 1, prob * pa * pt);
            }
        }
    };

    for (int s0 = 0; s0 < mdp.n_states; ++s0) {
        if (mdp.initial_dist[s0] <= 0.0) continue;
        cur.states[0] = s0;
        walk(0, mdp.initial_dist[s0]);
    }
    return out;
}

// Materialize an enumerated path as a sampled-trajectory record (one-hot
// observations, log-probs cached at theta).
inline Trajectory to_trajectory(const TabularMDP& mdp, const EnumeratedTrajectory& et,
                                const PolicySpec& spec, const Vec& theta) {
    Trajectory traj;
    traj.steps.reserve(et.actions.size());
    for (size_t h = 0; h < et.actions.size(); ++h) {
        const Vec obs = one_hot(et.states[h], mdp.n_states);
        traj.steps.push_back({obs, et.actions[h], et.rewards[static_cast<int>(h)],
                              log_prob(spec, theta, obs, et.actions[h])});
    }
    return traj;
}

// J(theta) = E[sum_t gamma^t r_t] by backward induction; no enumeration cap.
inline double exact_return(const TabularMDP& mdp, const PolicySpec& spec, const Vec& theta) {
    const auto dists = detail::state_action_dists(mdp, spec, theta);
    Vec v_next = Vec::Zero(mdp.n_states);
    for (int t = mdp.horizon - 1; t >= 0; --t) {
        Vec v = Vec::Zero(mdp.n_states);
        for (int s = 0; s < mdp.n_states; ++s) {
            double vs = 0.0;
            for (int a = 0; a < mdp.n_actions; ++a) {
                double q = mdp.reward_at(s, a);
                double cont = 0.0;
                for (int next = 0; next < mdp.n_states; ++next)
                    cont += mdp.transition_prob(s, a, next) * v_next[next];
                q += mdp.gamma * cont;
                vs += dists[s][a] * q;
            }
            v[s] = vs;
        }
        v_next = v;
    }
    double j = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) j += mdp.initial_dist[s] * v_next[s];
    return j;
}

struct ValueTables {
    std::vector<Vec> v;   // v[t][s], t = 0..H-1
    std::vector<Mat> q;   // q[t](s, a)
    Vec occupancy;        // d(s) = sum_t gamma^t Pr(s_t = s), unnormalized
    double j_from_occupancy = 0.0;
};

inline ValueTables value_tables(const TabularMDP& mdp, const PolicySpec& spec, const Vec& theta) {
    const auto dists = detail::state_action_dists(mdp, spec, theta);
    ValueTables out;
    out.v.assign(mdp.horizon, Vec::Zero(mdp.n_states));
    out.q.assign(mdp.horizon, Mat::Zero(mdp.n_states, mdp.n_actions));

    Vec v_next = Vec::Zero(mdp.n_states);
    for (int t = mdp.horizon - 1; t >= 0; --t) {
        for (int s = 0; s < mdp.n_states; ++s) {
            double vs = 0.0;
            for (int a = 0; a < mdp.n_actions; ++a) {
                double cont = 0.0;
                for (int next = 0; next < mdp.n_states; ++next)
                    cont += mdp.transition_prob(s, a, next) * v_next[next];
                out.q[t](s, a) = mdp.reward_at(s, a) + mdp.gamma * cont;
                vs += dists[s][a] * out.q[t](s, a);
            }
            out.v[t][s] = vs;
        }
        v_next = out.v[t];
    }

    // Discounted occupancy and the per-step reward decomposition of J.
    out.occupancy = Vec::Zero(mdp.n_states);
    Vec marginal = mdp.initial_dist;
    double disc = 1.0;
    for (int t = 0; t < mdp.horizon; ++t) {
        out.occupancy += disc * marginal;
        if (t + 1 < mdp.horizon) {
            Vec next_marginal = Vec::Zero(mdp.n_states);
            for (int s = 0; s < mdp.n_states; ++s)
                for (int a = 0; a < mdp.n_actions; ++a) {
                    const double mass = marginal[s] * dists[s][a];
                    if (mass == 0.0) continue;
                    for (int next = 0; next < mdp.n_states; ++next)
                        next_marginal[next] += mass * mdp.transition_prob(s, a, next);
                }
            marginal = next_marginal;
        }
        disc *= mdp.gamma;
    }
    double j = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
        double mean_reward = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) mean_reward += dists[s][a] * mdp.reward_at(s, a);
        j += out.occupancy[s] * mean_reward;
    }
    out.j_from_occupancy = j;
    return out;
}

inline Vec fd_gradient(const TabularMDP& mdp, const PolicySpec& spec, const Vec& theta,
                       double step = 1e-5) {
    require(step > 0.0, "fd_gradient: step must be positive");
    Vec g(theta.size());
    Vec probe = theta;
    for (int i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + step;
        const double plus = exact_return(mdp, spec, probe);
        probe[i] = theta[i] - step;
        const double minus = exact_return(mdp, spec, probe);
        probe[i] = theta[i];
        g[i] = (plus - minus) / (2.0 * step);
    }
    return g;
}

inline Vec fd_hessian_diag(const TabularMDP& mdp, const PolicySpec& spec, const Vec& theta,
                           double step = 1e-3) {
    require(step > 0.0, "fd_hessian_diag: step must be positive");
    const double center = exact_return(mdp, spec, theta);
    Vec h(theta.size());
    Vec probe = theta;
    for (int i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + step;
        const double plus = exact_return(mdp, spec, probe);
        probe[i] = theta[i] - step;
        const double minus = exact_return(mdp, spec, probe);
        probe[i] = theta[i];
        h[i] = (plus - 2.0 * center + minus) / (step * step);
    }
    return h;
}

// Exact expectation sum_tau p(tau) * estimator(tau) over the enumeration.
inline Vec estimator_expectation(const TabularMDP& mdp, const PolicySpec& spec, const Vec& theta,
                                 const std::function<Vec(const Trajectory&)>& estimator,
                                 double cap = kEnumerationCap) {
    const auto paths = enumerate_trajectories(mdp, spec, theta, cap);
    Vec acc;
    for (const auto& et : paths) {
        const Vec value = estimator(to_trajectory(mdp, et, spec, theta));
        if (acc.size() == 0) acc = Vec::Zero(value.size());
        acc += et.probability * value;
    }
    return acc;
}

}  // namespace pgsom
