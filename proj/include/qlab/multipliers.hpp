#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qlab/geometry.hpp"

namespace qlab {

using Complex = std::complex<double>;

// a(s) = zeta(s) (1 + |s|)^order, where zeta vanishes on |s| <= 2^-2M and is
// 1 on |s| >= 2^{-2M+1}.
struct SymbolSpec {
    double order = 0.0;
    double epsilon = 0.0;
    int M = 4;
    double inner = 0.0;  // 2^-2M
    // sup |D^beta a(s)| (1 + |s|)^{beta - order}, sampled, beta = 0..4
    std::array<double, 5> seminorms{};

    double operator()(double s) const;
    double derivative(double s, int beta) const;
};

SymbolSpec make_symbol(double order, double epsilon, int M);

// theta_0 = phi, theta_k = phi(s / 2^k) - phi(s / 2^{k-1}), where phi is 1 on
// |s| <= 2^{-3M-1} and 0 on |s| >= 2^-3M.
struct DyadicCutoff {
    int k = 0;
    int M = 4;

    double operator()(double s) const;
    // support of theta_k in |s|
    double lower() const;
    double upper() const;
};

DyadicCutoff dyadic_cutoff(int k, int M);
// sum_{k <= K} theta_k(s); telescopes to phi(s / 2^K)
double dyadic_partial_sum(int K, int M, double s);

// chi(xi) = chi1(y1 / |y|) chi2(rho(xi)) on the lower half y2 < 0, where y is
// xi in the frame of a boundary sector (the rotation used by boundary_arc).
struct AngularCutoff {
    int M = 4;
    double rotation = 0.0;

    double chi1(double u) const;
    double chi2(double rho) const;
    double operator()(Vec2 xi, double rho) const;
};

struct MultiplierField {
    std::function<Complex(Vec2)> eval;
    DomainPtr domain;
    std::string tag;
    std::optional<AngularCutoff> cutoff;
    // every xi with |xi| > support_radius maps to 0
    double support_radius = 0.0;

    Complex operator()(Vec2 xi) const { return eval(xi); }
};

// a(rho) e^{i rho} theta_k(rho), times chi for the given sector when requested.
MultiplierField wave_multiplier(const DomainPtr& domain, const SymbolSpec& a, int k, bool with_angular_cutoff,
                                int sector = 0);
// a(rho) e^{i rho} sum_{k <= kmax} theta_k(rho)
MultiplierField wave_multiplier_sum(const DomainPtr& domain, const SymbolSpec& a, int kmax);

// (1 - rho / t)_+^lambda
MultiplierField bochner_riesz(const DomainPtr& domain, double lambda, double t);
// d/dt of the above: lambda (rho / t^2) (1 - rho / t)_+^{lambda - 1}
MultiplierField bochner_riesz_dt(const DomainPtr& domain, double lambda, double t);

// One-dimensional profile m, used through m(rho).
struct ProfileFunction {
    std::string type;
    std::function<double(double)> m;
    // closed-form transform int m(s) e^{-i tau s} ds; empty means "use the DFT"
    std::function<Complex(double)> transform;
    double support_lo = 0.5, support_hi = 2.0;
};

ProfileFunction zero_profile();
// bump on (1/2, 2)
ProfileFunction bump_profile();
// exp(-(s - c)^2 / 2 w^2) cos(freq (s - c)), cut off smoothly to (1/2, 2)
ProfileFunction gaussian_modulated_profile(double center, double width, double frequency);
// piecewise linear through the samples, zero outside [s.front(), s.back()]
ProfileFunction table_profile(std::vector<double> s, std::vector<double> values);
// profile given by its transform; m is recovered only where a closed form is supplied
ProfileFunction transform_profile(std::string type, std::function<double(double)> m,
                                  std::function<Complex(double)> transform);
ProfileFunction scaled_profile(const ProfileFunction& p, double c);   // c m
ProfileFunction dilated_profile(const ProfileFunction& p, double t);  // m(t s)

// The fixed cutoff of the interpolated norm: 1 on [3/4, 3/2], 0 off (1/2, 2).
double norm_cutoff(double s);

struct Spectrum {
    double dtau = 0.0;
    std::vector<double> tau;  // symmetric, increasing
    std::vector<Complex> values;
};

struct SpectrumOptions {
    double sample_step = 1.0 / 2048.0;  // on s, tau extent pi / step
    double window = 4.0;                 // m sampled on [0, window)
    std::size_t padded = std::size_t(1) << 17;
};

Spectrum profile_spectrum(const ProfileFunction& p, const SpectrumOptions& opt = {});

struct NormValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

// int |hat m|^exponent (1 + |tau|)^power dtau by the trapezoid rule, with a
// tail bound extrapolated from the last decade of the grid.
NormValue weighted_integral(const Spectrum& s, double exponent, double power);

NormValue b_norm(const ProfileFunction& p, double kappa, double epsilon, const SpectrumOptions& opt = {});
NormValue theta_norm(const ProfileFunction& p, double theta, double kappa, double epsilon,
                     const SpectrumOptions& opt = {});

struct SubordinationResult {
    double max_error = 0.0;
    double tail_bound = 0.0;
    std::size_t samples = 0;
};

// max over xi of |m(rho(xi)) - (1/2 pi) int hat m(tau) e^{i tau rho(xi)} dtau|
SubordinationResult subordination_check(const DomainPtr& domain, const ProfileFunction& p,
                                        const std::vector<Vec2>& xs, const SpectrumOptions& opt = {});

}  // namespace qlab
