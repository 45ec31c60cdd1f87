#pragma once

#include "pgsom/base.hpp"

namespace pgsom {

// Common episodic-environment step result. An environment provides
//   Vec reset(Gen&), EnvStep step(int action, Gen&), obs_dim(), n_actions().
struct EnvStep {
    Vec obs;
    double reward = 0.0;
    bool done = false;
};

}  // namespace pgsom
