#include <boost/math/differentiation/autodiff.hpp>

#include <cmath>
#include <limits>

#include "qlab/multipliers.hpp"
#include "qlab/smooth.hpp"

namespace qlab {

namespace {

template <class T>
T symbol_value(const T& s, double order, double inner) {
    using std::abs;
    using std::pow;
    T r = abs(s);
    T zeta = smooth::step(T(r / inner - 1.0));
    if (smooth::value_of(zeta) == 0.0) return T(0.0);
    return zeta * pow(T(1.0 + r), order);
}

// phi(s): 1 on |s| <= 2^{-3M-1}, 0 on |s| >= 2^-3M
double base_cutoff(double s, int M) {
    double c = std::ldexp(1.0, -3 * M - 1);
    return 1.0 - smooth::step(std::abs(s) / c - 1.0);
}

}  // namespace

double SymbolSpec::operator()(double s) const { return symbol_value(s, order, inner); }

double SymbolSpec::derivative(double s, int beta) const {
    using boost::math::differentiation::make_fvar;
    if (beta < 0 || beta > 4) throw ConfigError("symbol derivative order must be in 0..4");
    auto x = make_fvar<double, 4>(s);
    auto y = symbol_value(x, order, inner);
    return static_cast<double>(y.derivative(static_cast<std::size_t>(beta)));
}

SymbolSpec make_symbol(double order, double epsilon, int M) {
    if (!(order <= 0.0)) throw ConfigError("symbol order must be <= 0");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (M < 1) throw ConfigError("M must be at least 1");
    SymbolSpec a;
    a.order = order;
    a.epsilon = epsilon;
    a.M = M;
    a.inner = std::ldexp(1.0, -2 * M);
    // Log-spaced samples from the inner edge to 2^20; a is even, so s > 0 suffices.
    const int samples = 4000;
    const double lo = std::log(a.inner), hi = std::log(std::ldexp(1.0, 20));
    for (int i = 0; i <= samples; ++i) {
        double s = std::exp(lo + (hi - lo) * i / samples);
        using boost::math::differentiation::make_fvar;
        auto y = symbol_value(make_fvar<double, 4>(s), order, a.inner);
        for (int beta = 0; beta <= 4; ++beta) {
            double d = std::abs(static_cast<double>(y.derivative(std::size_t(beta))));
            double weighted = d * std::pow(1.0 + s, beta - order);
            a.seminorms[beta] = std::max(a.seminorms[beta], weighted);
        }
    }
    return a;
}

double DyadicCutoff::operator()(double s) const {
    if (k == 0) return base_cutoff(s, M);
    return base_cutoff(std::ldexp(s, -k), M) - base_cutoff(std::ldexp(s, -(k - 1)), M);
}

double DyadicCutoff::lower() const { return k == 0 ? 0.0 : std::ldexp(1.0, k - 3 * M - 2); }
double DyadicCutoff::upper() const { return std::ldexp(1.0, k - 3 * M); }

DyadicCutoff dyadic_cutoff(int k, int M) {
    if (k < 0) throw ConfigError("dyadic index must be nonnegative");
    return DyadicCutoff{k, M};
}

double dyadic_partial_sum(int K, int M, double s) { return base_cutoff(std::ldexp(s, -K), M); }

double AngularCutoff::chi1(double u) const { return smooth::plateau(u, std::ldexp(1.0, -2 * M - 1)); }

double AngularCutoff::chi2(double rho) const {
    double edge = std::ldexp(1.0, -2 * M - 2);
    return smooth::step(rho / edge - 1.0);
}

double AngularCutoff::operator()(Vec2 xi, double rho) const {
    Vec2 w{std::cos(rotation), -std::sin(rotation)};
    Vec2 wp{std::sin(rotation), std::cos(rotation)};
    double y1 = dot(xi, w), y2 = dot(xi, wp);
    if (!(y2 < 0.0)) return 0.0;
    return chi1(y1 / std::hypot(y1, y2)) * chi2(rho);
}

MultiplierField wave_multiplier(const DomainPtr& domain, const SymbolSpec& a, int k, bool with_angular_cutoff,
                                int sector) {
    DyadicCutoff theta = dyadic_cutoff(k, a.M);
    MultiplierField f;
    f.domain = domain;
    f.tag = "wave k=" + std::to_string(k);
    if (with_angular_cutoff) {
        f.cutoff = AngularCutoff{a.M, SectorFrame{sector, a.M}.angle()};
        f.tag += " sector=" + std::to_string(sector);
    }
    f.support_radius = theta.upper() * domain->circumscribed_radius();
    auto cutoff = f.cutoff;
    f.eval = [domain, a, theta, cutoff](Vec2 xi) -> Complex {
        double rho = domain->minkowski(xi);
        double weight = theta(rho);
        if (weight == 0.0) return 0.0;
        weight *= a(rho);
        if (cutoff) weight *= (*cutoff)(xi, rho);
        if (weight == 0.0) return 0.0;
        return weight * std::polar(1.0, rho);
    };
    return f;
}

MultiplierField wave_multiplier_sum(const DomainPtr& domain, const SymbolSpec& a, int kmax) {
    if (kmax < 0) throw ConfigError("kmax must be nonnegative");
    MultiplierField f;
    f.domain = domain;
    f.tag = "wave sum k<=" + std::to_string(kmax);
    f.support_radius = std::ldexp(1.0, kmax - 3 * a.M) * domain->circumscribed_radius();
    const int M = a.M;
    f.eval = [domain, a, kmax, M](Vec2 xi) -> Complex {
        double rho = domain->minkowski(xi);
        double weight = dyadic_partial_sum(kmax, M, rho);
        if (weight == 0.0) return 0.0;
        weight *= a(rho);
        if (weight == 0.0) return 0.0;
        return weight * std::polar(1.0, rho);
    };
    return f;
}

MultiplierField bochner_riesz(const DomainPtr& domain, double lambda, double t) {
    if (!(t > 0.0)) throw InvalidScale("Bochner-Riesz scale t must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("Bochner-Riesz exponent must be nonnegative");
    MultiplierField f;
    f.domain = domain;
    f.tag = "bochner-riesz";
    f.support_radius = t * domain->circumscribed_radius();
    f.eval = [domain, lambda, t](Vec2 xi) -> Complex {
        double gap = 1.0 - domain->minkowski(xi) / t;
        if (gap <= 0.0) return 0.0;
        return std::pow(gap, lambda);
    };
    return f;
}

MultiplierField bochner_riesz_dt(const DomainPtr& domain, double lambda, double t) {
    if (!(t > 0.0)) throw InvalidScale("Bochner-Riesz scale t must be positive");
    if (!(lambda > 0.0)) throw ConfigError("Bochner-Riesz exponent must be positive for the t-derivative");
    MultiplierField f;
    f.domain = domain;
    f.tag = "bochner-riesz dt";
    f.support_radius = t * domain->circumscribed_radius();
    f.eval = [domain, lambda, t](Vec2 xi) -> Complex {
        double rho = domain->minkowski(xi);
        double gap = 1.0 - rho / t;
        if (gap <= 0.0) return 0.0;
        return lambda * rho / (t * t) * std::pow(gap, lambda - 1.0);
    };
    return f;
}

}  // namespace qlab
