#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace pgsom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Contract checks throw instead of asserting so callers (and tests) can
// observe violations without taking the process down.
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace pgsom
