#pragma once

#include <cstdint>
#include <random>

#include "pgsom/base.hpp"

namespace pgsom {

// All stochastic code draws from one 64-bit generator per run, through the
// helpers below, so a (seed, config) pair pins every sampled number.
using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits of one generator call.
template <class Gen>
double uniform01(Gen& gen) {
    static_assert(Gen::min() == 0 && Gen::max() == UINT64_MAX,
                  "uniform01 expects a full-range 64-bit generator");
    return static_cast<double>(static_cast<std::uint64_t>(gen()) >> 11) * 0x1.0p-53;
}

template <class Gen>
double uniform(Gen& gen, double lo, double hi) {
    return lo + uniform01(gen) * (hi - lo);
}

// Inverse-CDF draw from a probability vector. Rounding leftovers fall into
// the last index with nonzero mass.
template <class Gen>
int sample_index(Gen& gen, const Vec& probs) {
    const double u = uniform01(gen);
    double cum = 0.0;
    int last_positive = 0;
    for (int i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) last_positive = i;
        cum += probs[i];
        if (u < cum) return i;
    }
    return last_positive;
}

}  // namespace pgsom
