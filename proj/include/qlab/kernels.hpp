#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qlab/multipliers.hpp"

namespace qlab {

// n x n samples on [-L, L)^2 with spacing h = 2L/n, and the dual frequency
// grid with spacing pi/L. Index i maps to (i - n/2) times the spacing.
struct Grid {
    double L = 1.0;
    std::size_t n = 0;

    double h() const { return 2.0 * L / double(n); }
    double dxi() const { return kPi / L; }
    double x(std::size_t i) const { return (double(i) - double(n / 2)) * h(); }
    double xi(std::size_t j) const { return (double(j) - double(n / 2)) * dxi(); }
    // largest |xi_1| on the grid, pi n / (2L)
    double freq_extent() const { return kPi * double(n) / (2.0 * L); }
};

// n a power of two, at least 8
Grid make_grid(double L, std::size_t n);

struct SampledField {
    Grid grid;
    std::vector<Complex> values;  // row-major, index i * n + j, first index along axis 1

    Complex& at(std::size_t i, std::size_t j) { return values[i * grid.n + j]; }
    const Complex& at(std::size_t i, std::size_t j) const { return values[i * grid.n + j]; }
};

// Frequency samples of the multiplier (no margin check).
SampledField sample_multiplier(const MultiplierField& field, const Grid& grid);
// Spatial values from frequency samples: (2 pi)^-2 sum m(xi) e^{i x xi} dxi^2.
SampledField inverse_transform(const SampledField& spectrum);
// Frequency values from spatial samples: sum f(x) e^{-i x xi} h^2.
SampledField forward_transform(const SampledField& space);
// Throws AliasingRisk unless the frequency extent is at least twice the support radius.
SampledField synthesize_kernel(const MultiplierField& field, const Grid& grid);

struct L1Norm {
    double value = 0.0;
    double error = 0.0;  // |value(n) - value(n/2)| from every other sample
};

L1Norm l1_norm(const SampledField& field);
double lp_norm(const SampledField& field, double p);
// sqrt(sum |K|^2 h^2) for spatial samples, sqrt(sum |m|^2 dxi^2) for frequency samples
double l2_norm_spatial(const SampledField& field);
double l2_norm_frequency(const SampledField& field);

struct QuadratureOptions {
    double phase_sign = 1.0;       // -1 integrates the conjugate phase
    std::size_t max_nodes = 100000000;  // per kernel value
    double tolerance = 0.0;        // absolute; 0 selects 1e-6 * 2^{2(k - 3M)}
    // With period > 0 the result is sum_p K(x + period p), the quantity a DFT
    // on [-period/2, period/2)^2 computes. Besides x itself, only translates
    // within period/8 of the tangential line through the origin and within
    // images periods along it are summed; the kernel decays fast across that line.
    double period = 0.0;
    int images = 8;
};

struct QuadratureStats {
    std::size_t nodes = 0;         // total integrand evaluations
    double max_difference = 0.0;   // last change between refinements, worst point
};

// Sector kernel at the given points by the homogeneous-coordinate integral
// (2 pi)^-2 int int e^{i s (alpha x1' + gamma(alpha) x2' + 1)} a(s) theta_k(s)
// chi(s, alpha) s (alpha gamma'(alpha) - gamma(alpha)) dalpha ds,
// where x' is x in the sector frame.
std::vector<Complex> quadrature_kernel(const DomainPtr& domain, const SymbolSpec& a, int k, int sector,
                                       const std::vector<Vec2>& points, const QuadratureOptions& opt = {},
                                       QuadratureStats* stats = nullptr);

// Grid for K_k: frequency extent margin * (support radius of theta_k a), size n.
Grid decay_grid(const DomainPtr& domain, int k, int M, std::size_t n, double margin = 8.0);

struct DecayReport {
    std::vector<int> ks;
    std::vector<double> norms;       // ||K_k||_1
    std::vector<double> normalized;  // 2^{k eps / 2} ||K_k||_1
    std::vector<double> refine_err;  // relative change from n/2 to n
    std::vector<bool> vanishing;     // a theta_k is identically zero
    std::vector<double> extents;     // L per k
    double slope = 0.0;              // least-squares log2 slope over nonvanishing k
    double c_star = 0.0;             // max normalized, nonvanishing k
    double spread = 0.0;             // c_star / min normalized, nonvanishing k
};

DecayReport decay_experiment(const DomainPtr& domain, const SymbolSpec& a, int kmin, int kmax, std::size_t n,
                             double margin = 8.0);

// Atom on the cube of side 2^-l: constant values on cells x cells subsquares.
struct Atom {
    Vec2 center;
    int l = 0;
    int cells = 8;
    std::vector<double> values;  // row-major over cells, first index along axis 1

    double side() const { return std::ldexp(1.0, -l); }
    double cell() const { return side() / cells; }
    double sup() const;
    double integral() const;
    double value_at(Vec2 x) const;
};

// Seeded pattern with ||a||_inf <= |Q|^-1 and mean zero. Throws CubeTooSmall
// when cells < 8.
Atom make_atom(int l, std::uint64_t seed, int cells = 8, Vec2 center = {0.0, 0.0});
// +|Q|^-1 on the left half, -|Q|^-1 on the right half
Atom haar_atom(int l, Vec2 center = {0.0, 0.0}, int cells = 8);
// The same pattern on a cube of side 2^-l, values multiplied by 4^l.
Atom dilate_atom(const Atom& unit, int l);

// Exact transform of the piecewise-constant atom on the frequency grid.
SampledField atom_transform(const Atom& atom, const Grid& grid);

struct AtomResponse {
    double l1 = 0.0;
    double error = 0.0;
    SampledField field;  // T a_Q on the grid
};

// ||T a_Q||_1 for the multiplier a(rho) e^{i rho} sum_{k <= kmax} theta_k(rho).
AtomResponse atom_response(const DomainPtr& domain, const SymbolSpec& a, const Atom& atom, const Grid& grid,
                           int kmax = 8);

// Geometric t grid from tmin to tmax with per_octave points per doubling.
std::vector<double> log_t_grid(double tmin, double tmax, int per_octave);

struct SquareFunctionResult {
    SampledField g;  // G^alpha f, real and nonnegative
    double f_norm4 = 0.0;
    double g_norm4 = 0.0;
    double ratio = 0.0;
};

// G^alpha f = (int |d/dt R_t f|^2 t dt)^{1/2} with R_t f = F^-1[(1 - rho/t)_+^alpha f^],
// trapezoid rule in log t. Throws TGridTooCoarse if adjacent t differ by more
// than 2^{1/4}.
SquareFunctionResult square_function(const DomainPtr& domain, const SampledField& f, double alpha,
                                     const std::vector<double>& t_grid);

// Random field with f^ = (complex Gaussian) * bump on rho in (rho_max/4, rho_max).
SampledField random_band_limited(const DomainPtr& domain, const Grid& grid, double rho_max, std::uint64_t seed);

}  // namespace qlab
