#pragma once

// All cutoffs in the library are affine reparametrizations of the single
// profile exp(-1/(1-u^2)). Templates let the same code run on doubles and on
// boost autodiff jets.

#include <cmath>

namespace qlab::smooth {

inline double value_of(double x) { return x; }
template <class Jet>
double value_of(const Jet& x) { return static_cast<double>(x.derivative(0)); }

template <class T>
T bump(const T& u) {
    using std::exp;
    double v = value_of(u);
    if (v <= -1.0 || v >= 1.0) return T(0.0);
    return exp(-1.0 / (1.0 - u * u));
}

// bump(1 - x): the right half of the profile read from its edge, x in (0, 1].
template <class T>
T half_profile(const T& x) {
    using std::exp;
    if (value_of(x) <= 0.0) return T(0.0);
    return exp(-1.0 / (x * (2.0 - x)));
}

// 0 for x <= 0, 1 for x >= 1, C-infinity in between.
template <class T>
T step(const T& x) {
    double v = value_of(x);
    if (v <= 0.0) return T(0.0);
    if (v >= 1.0) return T(1.0);
    T a = half_profile(x);
    T b = half_profile(T(1.0 - x));
    return a / (a + b);
}

// 1 on |s| <= r, 0 on |s| >= 2r.
template <class T>
T plateau(const T& s, double r) {
    using std::abs;
    return T(1.0) - step(T(abs(s) / r - 1.0));
}

// Integral of bump over [-1, 1].
double bump_mass();

// Unit-mass bump supported in [-width, width].
inline double mollifier(double x, double width) {
    return bump(x / width) / (bump_mass() * width);
}
double mollifier_derivative(double x, double width);
double mollifier_second_derivative(double x, double width);

}  // namespace qlab::smooth
