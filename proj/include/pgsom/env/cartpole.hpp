#pragma once

#include <cmath>
#include <stdexcept>

#include "pgsom/base.hpp"
#include "pgsom/env/episodic.hpp"
#include "pgsom/rng.hpp"

namespace pgsom {

// Classic control constants; the de-facto community values behind the usual
// 200/400/500 return thresholds.
namespace cartpole {
inline constexpr double kGravity = 9.8;
inline constexpr double kMassCart = 1.0;
inline constexpr double kMassPole = 0.1;
inline constexpr double kTotalMass = kMassCart + kMassPole;
inline constexpr double kHalfLength = 0.5;
inline constexpr double kPoleMassLength = kMassPole * kHalfLength;
inline constexpr double kForceMag = 10.0;
inline constexpr double kTau = 0.02;
inline constexpr double kXThreshold = 2.4;
inline const double kThetaThreshold = 12.0 * M_PI / 180.0;
inline constexpr int kMaxSteps = 500;
}  // namespace cartpole

struct CartPoleState {
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;
    int steps_elapsed = 0;
};

inline bool cartpole_terminal(const CartPoleState& s) {
    return std::abs(s.x) > cartpole::kXThreshold ||
           std::abs(s.theta) > cartpole::kThetaThreshold ||
           s.steps_elapsed >= cartpole::kMaxSteps;
}

template <class Gen>
CartPoleState cartpole_reset(Gen& gen) {
    CartPoleState s;
    s.x = uniform(gen, -0.05, 0.05);
    s.x_dot = uniform(gen, -0.05, 0.05);
    s.theta = uniform(gen, -0.05, 0.05);
    s.theta_dot = uniform(gen, -0.05, 0.05);
    s.steps_elapsed = 0;
    return s;
}

struct CartPoleStepOut {
    CartPoleState state;
    double reward = 1.0;
    bool done = false;
};

// Semi-implicit Euler: velocities are updated first, positions use the new
// velocities. Action 0 pushes left, 1 pushes right.
inline CartPoleStepOut cartpole_step(const CartPoleState& s, int action) {
    require(action == 0 || action == 1, "cartpole_step: action must be 0 or 1");
    if (cartpole_terminal(s)) throw std::logic_error("cartpole_step: stepping a terminal state");

    using namespace cartpole;
    const double force = action == 1 ? kForceMag : -kForceMag;
    const double cos_t = std::cos(s.theta);
    const double sin_t = std::sin(s.theta);
    const double temp = (force + kPoleMassLength * s.theta_dot * s.theta_dot * sin_t) / kTotalMass;
    const double theta_acc =
        (kGravity * sin_t - cos_t * temp) /
        (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
    const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

    CartPoleStepOut out;
    out.state.x_dot = s.x_dot + kTau * x_acc;
    out.state.x = s.x + kTau * out.state.x_dot;
    out.state.theta_dot = s.theta_dot + kTau * theta_acc;
    out.state.theta = s.theta + kTau * out.state.theta_dot;
    out.state.steps_elapsed = s.steps_elapsed + 1;
    out.reward = 1.0;
    out.done = cartpole_terminal(out.state);
    return out;
}

inline Vec cartpole_observation(const CartPoleState& s) {
    Vec obs(4);
    obs << s.x, s.x_dot, s.theta, s.theta_dot;
    return obs;
}

class CartPoleEnv {
public:
    int obs_dim() const { return 4; }
    int n_actions() const { return 2; }

    template <class Gen>
    Vec reset(Gen& gen) {
        state_ = cartpole_reset(gen);
        return cartpole_observation(state_);
    }

    template <class Gen>
    EnvStep step(int action, Gen&) {
        const auto out = cartpole_step(state_, action);
        state_ = out.state;
        return {cartpole_observation(state_), out.reward, out.done};
    }

    const CartPoleState& state() const { return state_; }

private:
    CartPoleState state_;
};

}  // namespace pgsom
