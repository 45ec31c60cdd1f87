#pragma once

#include <cmath>

namespace pgsom {

// First-order dual number. Running a (hand-written) reverse-mode gradient
// computation on Dual scalars yields Hessian-vector products: seed the
// tangent of the parameters with a direction v and the tangent of the
// gradient output is H*v (forward-over-reverse).
struct Dual {
    double v = 0.0;  // value
    double d = 0.0;  // tangent

    Dual() = default;
    Dual(double value) : v(value) {}
    Dual(double value, double tangent) : v(value), d(tangent) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
    const double q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}
inline Dual& operator+=(Dual& a, Dual b) { a = a + b; return a; }
inline Dual& operator-=(Dual& a, Dual b) { a = a - b; return a; }
inline Dual& operator*=(Dual& a, Dual b) { a = a * b; return a; }

inline Dual exp(Dual a) {
    const double e = std::exp(a.v);
    return {e, a.d * e};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual tanh(Dual a) {
    const double t = std::tanh(a.v);
    return {t, a.d * (1.0 - t * t)};
}

inline double value_of(double x) { return x; }
inline double value_of(Dual x) { return x.v; }

}  // namespace pgsom
