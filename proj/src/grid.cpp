#include <fftw3.h>

#include <cmath>
#include <limits>

#include "qlab/kernels.hpp"

namespace qlab {

namespace {

// Continuum transform by a shifted DFT. Index i stands for (i - n/2), and
// (i - n/2)(j - n/2) = ij - n/2 (i + j) + n^2/4, where the last term drops
// because n/2 is even. The two sign flips are the (-1)^i and (-1)^j factors.
void shifted_dft(std::vector<Complex>& data, std::size_t n, int sign, double scale) {
    auto* raw = reinterpret_cast<fftw_complex*>(data.data());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if ((i + j) % 2 == 1) data[i * n + j] = -data[i * n + j];
    fftw_plan plan = fftw_plan_dft_2d(int(n), int(n), raw, raw, sign, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = (i + j) % 2 == 1 ? -scale : scale;
            data[i * n + j] *= s;
        }
}

}  // namespace

Grid make_grid(double L, std::size_t n) {
    if (!(L > 0.0)) throw ConfigError("grid half-width must be positive");
    if (n < 8 || (n & (n - 1)) != 0) throw ConfigError("grid size must be a power of two, at least 8");
    return Grid{L, n};
}

SampledField sample_multiplier(const MultiplierField& field, const Grid& grid) {
    SampledField out{grid, std::vector<Complex>(grid.n * grid.n)};
    const double cut = field.support_radius > 0.0 ? field.support_radius : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.n; ++i) {
        double a = grid.xi(i);
        if (std::abs(a) > cut) continue;
        for (std::size_t j = 0; j < grid.n; ++j) {
            Vec2 xi{a, grid.xi(j)};
            if (norm(xi) > cut) continue;
            out.at(i, j) = field(xi);
        }
    }
    return out;
}

SampledField inverse_transform(const SampledField& spectrum) {
    SampledField out = spectrum;
    const double d = spectrum.grid.dxi();
    shifted_dft(out.values, out.grid.n, FFTW_BACKWARD, d * d / (4.0 * kPi * kPi));
    return out;
}

SampledField forward_transform(const SampledField& space) {
    SampledField out = space;
    const double h = space.grid.h();
    shifted_dft(out.values, out.grid.n, FFTW_FORWARD, h * h);
    return out;
}

SampledField synthesize_kernel(const MultiplierField& field, const Grid& grid) {
    if (grid.freq_extent() < 2.0 * field.support_radius)
        throw AliasingRisk("frequency extent " + std::to_string(grid.freq_extent()) +
                           " is below twice the support radius " + std::to_string(field.support_radius));
    return inverse_transform(sample_multiplier(field, grid));
}

L1Norm l1_norm(const SampledField& field) {
    const std::size_t n = field.grid.n;
    const double h = field.grid.h();
    double fine = 0.0, coarse = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double a = std::abs(field.at(i, j));
            fine += a;
            if (i % 2 == 0 && j % 2 == 0) coarse += a;
        }
    L1Norm out;
    out.value = fine * h * h;
    out.error = std::abs(out.value - coarse * 4.0 * h * h);
    return out;
}

double lp_norm(const SampledField& field, double p) {
    if (!(p >= 1.0)) throw ConfigError("Lp exponent must be at least 1");
    double sum = 0.0;
    for (const auto& v : field.values) sum += std::pow(std::abs(v), p);
    const double h = field.grid.h();
    return std::pow(sum * h * h, 1.0 / p);
}

double l2_norm_spatial(const SampledField& field) { return lp_norm(field, 2.0); }

double l2_norm_frequency(const SampledField& field) {
    double sum = 0.0;
    for (const auto& v : field.values) sum += std::norm(v);
    const double d = field.grid.dxi();
    return std::sqrt(sum) * d;
}

}  // namespace qlab
