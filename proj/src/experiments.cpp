#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qlab/kernels.hpp"
#include "qlab/smooth.hpp"

namespace qlab {

Grid decay_grid(const DomainPtr& domain, int k, int M, std::size_t n, double margin) {
    if (!(margin >= 2.0)) throw ConfigError("frequency margin must be at least 2");
    double support = dyadic_cutoff(k, M).upper() * domain->circumscribed_radius();
    return make_grid(kPi * double(n) / (2.0 * margin * support), n);
}

DecayReport decay_experiment(const DomainPtr& domain, const SymbolSpec& a, int kmin, int kmax, std::size_t n,
                             double margin) {
    if (!(a.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (kmin < 1 || kmax < kmin) throw ConfigError("need 1 <= kmin <= kmax");
    DecayReport r;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, count = 0;
    double low = std::numeric_limits<double>::infinity();
    for (int k = kmin; k <= kmax; ++k) {
        r.ks.push_back(k);
        Grid grid = decay_grid(domain, k, a.M, n, margin);
        r.extents.push_back(grid.L);
        // a vanishes on |s| <= 2^-2M, which covers supp theta_k for k <= M
        bool vanishing = dyadic_cutoff(k, a.M).upper() <= a.inner;
        r.vanishing.push_back(vanishing);
        if (vanishing) {
            r.norms.push_back(0.0);
            r.normalized.push_back(0.0);
            r.refine_err.push_back(0.0);
            continue;
        }
        SampledField kernel = synthesize_kernel(wave_multiplier(domain, a, k, false), grid);
        L1Norm l1 = l1_norm(kernel);
        double normalized = std::pow(2.0, k * a.epsilon / 2.0) * l1.value;
        r.norms.push_back(l1.value);
        r.normalized.push_back(normalized);
        r.refine_err.push_back(l1.error / l1.value);
        r.c_star = std::max(r.c_star, normalized);
        low = std::min(low, normalized);
        double y = std::log2(l1.value);
        sx += k;
        sy += y;
        sxx += double(k) * k;
        sxy += k * y;
        count += 1;
    }
    if (count == 0) throw ConfigError("the symbol vanishes on every requested band");
    r.spread = r.c_star / low;
    if (count > 1) r.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    return r;
}

double Atom::sup() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double Atom::integral() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * cell() * cell();
}

double Atom::value_at(Vec2 x) const {
    double u = (x.x - center.x) / side() + 0.5, v = (x.y - center.y) / side() + 0.5;
    if (u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) return 0.0;
    auto i = std::size_t(u * cells), j = std::size_t(v * cells);
    return values[i * std::size_t(cells) + j];
}

Atom make_atom(int l, std::uint64_t seed, int cells, Vec2 center) {
    if (l < 0) throw ConfigError("atom level must be nonnegative");
    if (cells < 8) throw CubeTooSmall("an atom needs at least 8 samples per side, got " + std::to_string(cells));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> v(std::size_t(cells) * std::size_t(cells));
    for (double& x : v) x = unit(rng);
    auto mean = [&] {
        double s = 0.0;
        for (double x : v) s += x;
        return s / double(v.size());
    };
    auto sup = [&] {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };
    bool done = false;
    for (int it = 0; it < 100 && !done; ++it) {
        double mu = mean();
        for (double& x : v) x -= mu;
        if (sup() <= 1.0) {
            done = true;
        } else {
            for (double& x : v) x = std::clamp(x, -1.0, 1.0);
        }
    }
    if (!done) {
        // scaling keeps the mean at zero
        double mu = mean();
        for (double& x : v) x -= mu;
        double s = sup();
        for (double& x : v) x /= s;
    }
    Atom atom;
    atom.center = center;
    atom.l = l;
    atom.cells = cells;
    const double scale = std::ldexp(1.0, 2 * l);
    for (double x : v) atom.values.push_back(x * scale);
    return atom;
}

Atom haar_atom(int l, Vec2 center, int cells) {
    if (l < 0) throw ConfigError("atom level must be nonnegative");
    if (cells < 8) throw CubeTooSmall("an atom needs at least 8 samples per side, got " + std::to_string(cells));
    if (cells % 2 != 0) throw ConfigError("Haar atom needs an even cell count");
    Atom atom;
    atom.center = center;
    atom.l = l;
    atom.cells = cells;
    const double scale = std::ldexp(1.0, 2 * l);
    for (int i = 0; i < cells; ++i)
        for (int j = 0; j < cells; ++j) atom.values.push_back(i < cells / 2 ? scale : -scale);
    return atom;
}

Atom dilate_atom(const Atom& unit, int l) {
    if (unit.l != 0) throw ConfigError("dilate_atom expects a unit-cube atom");
    if (l < 0) throw ConfigError("atom level must be nonnegative");
    Atom atom = unit;
    atom.l = l;
    for (double& x : atom.values) x = std::ldexp(x, 2 * l);
    return atom;
}

SampledField atom_transform(const Atom& atom, const Grid& grid) {
    const std::size_t n = grid.n, m = std::size_t(atom.cells);
    const double c = atom.cell();
    // int over a cell [mid - c/2, mid + c/2] of e^{-i xi x} dx
    auto cell_transform = [c](double xi, double mid) {
        double u = 0.5 * xi * c;
        double sinc = u == 0.0 ? 1.0 : std::sin(u) / u;
        return std::polar(c * sinc, -xi * mid);
    };
    std::vector<double> mid1(m), mid2(m);
    for (std::size_t i = 0; i < m; ++i) {
        mid1[i] = atom.center.x - 0.5 * atom.side() + (double(i) + 0.5) * c;
        mid2[i] = atom.center.y - 0.5 * atom.side() + (double(i) + 0.5) * c;
    }
    std::vector<Complex> e2(n * m);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t b = 0; b < m; ++b) e2[j * m + b] = cell_transform(grid.xi(j), mid2[b]);

    SampledField out{grid, std::vector<Complex>(n * n)};
    std::vector<Complex> partial(m);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi1 = grid.xi(i);
        std::fill(partial.begin(), partial.end(), Complex(0.0));
        for (std::size_t a = 0; a < m; ++a) {
            Complex e1 = cell_transform(xi1, mid1[a]);
            for (std::size_t b = 0; b < m; ++b) partial[b] += atom.values[a * m + b] * e1;
        }
        for (std::size_t j = 0; j < n; ++j) {
            Complex sum = 0.0;
            for (std::size_t b = 0; b < m; ++b) sum += partial[b] * e2[j * m + b];
            out.at(i, j) = sum;
        }
    }
    return out;
}

AtomResponse atom_response(const DomainPtr& domain, const SymbolSpec& a, const Atom& atom, const Grid& grid,
                           int kmax) {
    MultiplierField field = wave_multiplier_sum(domain, a, kmax);
    if (grid.freq_extent() < 2.0 * field.support_radius)
        throw AliasingRisk("frequency extent below twice the multiplier support");
    SampledField spectrum = atom_transform(atom, grid);
    SampledField symbol = sample_multiplier(field, grid);
    for (std::size_t i = 0; i < spectrum.values.size(); ++i) spectrum.values[i] *= symbol.values[i];
    AtomResponse r;
    r.field = inverse_transform(spectrum);
    L1Norm l1 = l1_norm(r.field);
    r.l1 = l1.value;
    r.error = l1.error;
    return r;
}

std::vector<double> log_t_grid(double tmin, double tmax, int per_octave) {
    if (!(tmin > 0.0) || !(tmax > tmin)) throw InvalidScale("need 0 < tmin < tmax");
    if (per_octave < 1) throw ConfigError("need at least one t per octave");
    const double octaves = std::log2(tmax / tmin);
    const auto steps = std::size_t(std::ceil(octaves * per_octave - 1e-9));
    std::vector<double> t;
    for (std::size_t i = 0; i <= steps; ++i) t.push_back(tmin * std::exp2(octaves * double(i) / double(steps)));
    return t;
}

SquareFunctionResult square_function(const DomainPtr& domain, const SampledField& f, double alpha,
                                     const std::vector<double>& t_grid) {
    if (!(alpha >= 0.51)) throw ConfigError("alpha must be at least 0.51");
    if (t_grid.size() < 2) throw TGridTooCoarse("t grid needs at least two points");
    const double max_ratio = std::exp2(0.25) * (1.0 + 1e-12);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0)) throw InvalidScale("t must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw ConfigError("t grid must be increasing");
        if (i > 0 && t_grid[i] / t_grid[i - 1] > max_ratio)
            throw TGridTooCoarse("adjacent t ratio " + std::to_string(t_grid[i] / t_grid[i - 1]) + " exceeds 2^(1/4)");
    }
    const Grid& grid = f.grid;
    const std::size_t n = grid.n;
    SampledField fhat = forward_transform(f);
    std::vector<double> rho(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) rho[i * n + j] = domain->minkowski({grid.xi(i), grid.xi(j)});

    std::vector<double> acc(n * n, 0.0);
    SampledField work{grid, std::vector<Complex>(n * n)};
    const std::size_t last = t_grid.size() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
        const double t = t_grid[k];
        double du = 0.0;  // trapezoid weight in log t
        if (k > 0) du += 0.5 * std::log(t / t_grid[k - 1]);
        if (k < last) du += 0.5 * std::log(t_grid[k + 1] / t);
        for (std::size_t i = 0; i < n * n; ++i) {
            double gap = 1.0 - rho[i] / t;
            work.values[i] = gap > 0.0 ? fhat.values[i] * (alpha * rho[i] / (t * t) * std::pow(gap, alpha - 1.0)) : 0.0;
        }
        SampledField d = inverse_transform(work);
        for (std::size_t i = 0; i < n * n; ++i) acc[i] += std::norm(d.values[i]) * t * t * du;
    }
    SquareFunctionResult r;
    r.g = SampledField{grid, std::vector<Complex>(n * n)};
    for (std::size_t i = 0; i < n * n; ++i) r.g.values[i] = std::sqrt(acc[i]);
    r.f_norm4 = lp_norm(f, 4.0);
    r.g_norm4 = lp_norm(r.g, 4.0);
    r.ratio = r.f_norm4 > 0.0 ? r.g_norm4 / r.f_norm4 : 0.0;
    return r;
}

SampledField random_band_limited(const DomainPtr& domain, const Grid& grid, double rho_max, std::uint64_t seed) {
    if (!(rho_max > 0.0)) throw ConfigError("band limit must be positive");
    if (grid.freq_extent() < 2.0 * rho_max * domain->circumscribed_radius())
        throw AliasingRisk("frequency extent below twice the band limit");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SampledField spectrum{grid, std::vector<Complex>(grid.n * grid.n)};
    const double lo = 0.25 * rho_max, mid = 0.5 * (lo + rho_max), half = 0.5 * (rho_max - lo);
    for (std::size_t i = 0; i < grid.n; ++i)
        for (std::size_t j = 0; j < grid.n; ++j) {
            // draw for every cell so the field does not depend on the support test
            double re = normal(rng), im = normal(rng);
            double rho = domain->minkowski({grid.xi(i), grid.xi(j)});
            spectrum.at(i, j) = Complex(re, im) * smooth::bump((rho - mid) / half);
        }
    return inverse_transform(spectrum);
}

}  // namespace qlab
