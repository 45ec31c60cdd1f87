#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgsom/base.hpp"
#include "pgsom/env/episodic.hpp"
#include "pgsom/rng.hpp"

namespace pgsom {

// Fully enumerable finite-horizon MDP. Every read of the transition kernel
// goes through transition_prob(), which bumps kernel_reads; tests use the
// counter to prove that trajectory-based estimators never touch the kernel.
struct TabularMDP {
    int n_states = 0;
    int n_actions = 0;
    std::vector<Mat> transition;  // [s](a, s')
    Mat reward;                   // (s, a)
    Vec initial_dist;
    int horizon = 1;
    double gamma = 1.0;

    mutable std::uint64_t kernel_reads = 0;

    double transition_prob(int s, int a, int next) const {
        ++kernel_reads;
        return transition[s](a, next);
    }

    double reward_at(int s, int a) const { return reward(s, a); }

    void validate() const {
        require(n_states >= 1 && n_actions >= 1, "TabularMDP: empty state or action space");
        require(horizon >= 1, "TabularMDP: horizon must be >= 1");
        require(gamma > 0.0 && gamma <= 1.0, "TabularMDP: discount must be in (0, 1]");
        require(static_cast<int>(transition.size()) == n_states, "TabularMDP: transition size");
        require(reward.rows() == n_states && reward.cols() == n_actions, "TabularMDP: reward shape");
        require(initial_dist.size() == n_states, "TabularMDP: initial_dist size");
        for (int s = 0; s < n_states; ++s) {
            require(transition[s].rows() == n_actions && transition[s].cols() == n_states,
                    "TabularMDP: transition row shape");
            for (int a = 0; a < n_actions; ++a) {
                double sum = 0.0;
                for (int next = 0; next < n_states; ++next) {
                    const double p = transition[s](a, next);
                    require(p >= 0.0, "TabularMDP: negative transition probability");
                    sum += p;
                }
                require(std::abs(sum - 1.0) <= 1e-12, "TabularMDP: transition row does not sum to 1");
            }
        }
        double init_sum = 0.0;
        for (int s = 0; s < n_states; ++s) {
            require(initial_dist[s] >= 0.0, "TabularMDP: negative initial probability");
            init_sum += initial_dist[s];
        }
        require(std::abs(init_sum - 1.0) <= 1e-12, "TabularMDP: initial_dist does not sum to 1");
    }

    static TabularMDP from_json(const nlohmann::json& j) {
        TabularMDP mdp;
        mdp.n_states = j.at("n_states").get<int>();
        mdp.n_actions = j.at("n_actions").get<int>();
        mdp.horizon = j.at("horizon").get<int>();
        mdp.gamma = j.at("discount").get<double>();
        const auto& tr = j.at("transition");
        mdp.transition.resize(mdp.n_states);
        for (int s = 0; s < mdp.n_states; ++s) {
            mdp.transition[s] = Mat(mdp.n_actions, mdp.n_states);
            for (int a = 0; a < mdp.n_actions; ++a)
                for (int next = 0; next < mdp.n_states; ++next)
                    mdp.transition[s](a, next) = tr.at(s).at(a).at(next).get<double>();
        }
        const auto& rw = j.at("reward");
        mdp.reward = Mat(mdp.n_states, mdp.n_actions);
        for (int s = 0; s < mdp.n_states; ++s)
            for (int a = 0; a < mdp.n_actions; ++a)
                mdp.reward(s, a) = rw.at(s).at(a).get<double>();
        const auto& init = j.at("initial_dist");
        mdp.initial_dist = Vec(mdp.n_states);
        for (int s = 0; s < mdp.n_states; ++s) mdp.initial_dist[s] = init.at(s).get<double>();
        mdp.validate();
        return mdp;
    }

    static TabularMDP load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("TabularMDP: cannot open " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }
};

inline Vec one_hot(int index, int dim) {
    Vec v = Vec::Zero(dim);
    v[index] = 1.0;
    return v;
}

template <class Gen>
int mdp_reset(const TabularMDP& mdp, Gen& gen) {
    return sample_index(gen, mdp.initial_dist);
}

struct MdpStepOut {
    int next_state = 0;
    double reward = 0.0;
    bool done = false;
};

// step_index is the number of steps already taken; the episode ends when it
// reaches horizon after this step.
template <class Gen>
MdpStepOut mdp_step(const TabularMDP& mdp, int s, int a, int step_index, Gen& gen) {
    require(s >= 0 && s < mdp.n_states, "mdp_step: state index out of range");
    require(a >= 0 && a < mdp.n_actions, "mdp_step: action index out of range");
    const double u = uniform01(gen);
    double cum = 0.0;
    int next = mdp.n_states - 1;
    for (int cand = 0; cand < mdp.n_states; ++cand) {
        cum += mdp.transition_prob(s, a, cand);
        if (u < cum) {
            next = cand;
            break;
        }
    }
    return {next, mdp.reward_at(s, a), step_index + 1 >= mdp.horizon};
}

class TabularEnv {
public:
    explicit TabularEnv(TabularMDP mdp) : mdp_(std::move(mdp)) { mdp_.validate(); }

    int obs_dim() const { return mdp_.n_states; }
    int n_actions() const { return mdp_.n_actions; }
    const TabularMDP& mdp() const { return mdp_; }

    template <class Gen>
    Vec reset(Gen& gen) {
        state_ = mdp_reset(mdp_, gen);
        t_ = 0;
        return one_hot(state_, mdp_.n_states);
    }

    template <class Gen>
    EnvStep step(int action, Gen& gen) {
        const auto out = mdp_step(mdp_, state_, action, t_, gen);
        state_ = out.next_state;
        ++t_;
        return {one_hot(state_, mdp_.n_states), out.reward, out.done};
    }

private:
    TabularMDP mdp_;
    int state_ = 0;
    int t_ = 0;
};

}  // namespace pgsom
