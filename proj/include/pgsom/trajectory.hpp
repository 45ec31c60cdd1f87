#pragma once

#include <vector>

#include "pgsom/base.hpp"
#include "pgsom/env/episodic.hpp"
#include "pgsom/policy.hpp"

namespace pgsom {

struct TrajStep {
    Vec obs;
    int action = 0;
    double reward = 0.0;
    double log_prob = 0.0;  // ln pi(action|obs) at the collection parameters
};

struct Trajectory {
    std::vector<TrajStep> steps;

    int size() const { return static_cast<int>(steps.size()); }
    bool empty() const { return steps.empty(); }

    double undiscounted_return() const {
        double total = 0.0;
        for (const auto& st : steps) total += st.reward;
        return total;
    }
};

// One on-policy rollout to termination.
template <class Env, class Gen>
Trajectory sample_trajectory(Env& env, const PolicySpec& spec, const Vec& theta, Gen& gen) {
    Trajectory traj;
    Vec obs = env.reset(gen);
    while (true) {
        const int action = sample_action(spec, theta, obs, gen);
        const double lp = log_prob(spec, theta, obs, action);
        const EnvStep out = env.step(action, gen);
        traj.steps.push_back({obs, action, out.reward, lp});
        if (out.done) break;
        obs = out.obs;
    }
    return traj;
}

}  // namespace pgsom
