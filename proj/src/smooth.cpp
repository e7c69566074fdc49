#include "qlab/smooth.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qlab::smooth {

double bump_mass() {
    static const double mass = [] {
        auto f = [](double u) { return bump(u); };
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            f, -1.0, 1.0, 20, 1e-15);
    }();
    return mass;
}

double mollifier_derivative(double x, double width) {
    double u = x / width;
    if (u <= -1.0 || u >= 1.0) return 0.0;
    double d = 1.0 - u * u;
    return -2.0 * u / (d * d) * bump(u) / (bump_mass() * width * width);
}

double mollifier_second_derivative(double x, double width) {
    double u = x / width;
    if (u <= -1.0 || u >= 1.0) return 0.0;
    double d = 1.0 - u * u;
    double d2 = d * d;
    double shape = 4.0 * u * u / (d2 * d2) - 2.0 / d2 - 8.0 * u * u / (d2 * d);
    return shape * bump(u) / (bump_mass() * width * width * width);
}

}  // namespace qlab::smooth
