#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "qlab/kernels.hpp"

using namespace qlab;

namespace {

DomainPtr disc8() {
    DomainSpec s;
    s.kind = DomainKind::Disc;
    return construct_domain(s);
}

DomainPtr square8() {
    DomainSpec s;
    s.kind = DomainKind::Polygon;
    s.vertices = {{8, -8}, {8, 8}, {-8, 8}, {-8, -8}};
    return construct_domain(s);
}

MultiplierField gaussian_field(Vec2 shift = {0.0, 0.0}, double radius = 10.0) {
    MultiplierField f;
    f.tag = "gaussian";
    f.support_radius = radius + norm(shift);
    f.eval = [shift](Vec2 xi) -> Complex {
        Vec2 d{xi.x - shift.x, xi.y - shift.y};
        return std::exp(-0.5 * dot(d, d));
    };
    return f;
}

double max_abs(const SampledField& f) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_CASE("grid geometry and validation") {
    Grid g = make_grid(16.0, 256);
    CHECK(g.h() == 0.125);
    CHECK(g.dxi() == doctest::Approx(kPi / 16.0));
    CHECK(g.x(128) == 0.0);
    CHECK(g.x(0) == -16.0);
    CHECK(g.freq_extent() == doctest::Approx(kPi * 8.0));
    CHECK_THROWS_AS(make_grid(16.0, 200), ConfigError);
    CHECK_THROWS_AS(make_grid(16.0, 4), ConfigError);
    CHECK_THROWS_AS(make_grid(0.0, 64), ConfigError);
}

TEST_CASE("zero multiplier gives the zero kernel") {
    MultiplierField zero;
    zero.support_radius = 1.0;
    zero.eval = [](Vec2) { return Complex(0.0); };
    SampledField k = synthesize_kernel(zero, make_grid(8.0, 64));
    CHECK(max_abs(k) == 0.0);
    CHECK(l1_norm(k).value == 0.0);
    CHECK(l1_norm(k).error == 0.0);
}

TEST_CASE("Gaussian multiplier synthesizes the 2 pi normalized Gaussian") {
    Grid g = make_grid(16.0, 256);
    SampledField k = synthesize_kernel(gaussian_field(), g);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j) {
            double r2 = g.x(i) * g.x(i) + g.x(j) * g.x(j);
            if (r2 > 16.0) continue;
            double exact = std::exp(-0.5 * r2) / kTwoPi;
            worst = std::max(worst, std::abs(k.at(i, j) - exact) / exact);
        }
    CHECK(worst <= 1e-6);
    L1Norm mass = l1_norm(k);
    CHECK(std::abs(mass.value - 1.0) <= 1e-6);
}

TEST_CASE("coarsening error of a sign-changing kernel shrinks with the grid") {
    // K = sin(pi x1 / 2) e^{-|x|^2/2} / (2 pi): |K| has kinks on the even integers,
    // which lie on every grid below, so the l1 Riemann sum converges like h^2.
    const double shift = kPi / 2.0;
    MultiplierField f;
    f.support_radius = 10.0 + shift;
    f.eval = [shift](Vec2 xi) -> Complex {
        auto g = [](double a, double b) { return std::exp(-0.5 * (a * a + b * b)); };
        return Complex(0.0, -0.5) * (g(xi.x - shift, xi.y) - g(xi.x + shift, xi.y));
    };
    L1Norm coarse = l1_norm(synthesize_kernel(f, make_grid(16.0, 512)));
    L1Norm fine = l1_norm(synthesize_kernel(f, make_grid(16.0, 1024)));
    CHECK(fine.error > 0.0);
    CHECK(coarse.error >= 2.0 * fine.error);
    // every other sample of the fine grid is the coarse grid
    CHECK(fine.error == doctest::Approx(std::abs(fine.value - coarse.value)).epsilon(1e-9));
}

TEST_CASE("discrete Plancherel: 2 pi ||K||_2 = ||m||_2") {
    auto domain = disc8();
    SymbolSpec a = make_symbol(-0.75, 0.25, 4);
    MultiplierField m = wave_multiplier(domain, a, 6, false);
    Grid g = decay_grid(domain, 6, 4, 256, 4.0);
    SampledField spectrum = sample_multiplier(m, g);
    SampledField kernel = inverse_transform(spectrum);
    CHECK(kTwoPi * l2_norm_spatial(kernel) == doctest::Approx(l2_norm_frequency(spectrum)).epsilon(1e-8));
    // and the forward transform inverts the inverse one
    SampledField back = forward_transform(kernel);
    double worst = 0.0;
    for (std::size_t i = 0; i < back.values.size(); ++i)
        worst = std::max(worst, std::abs(back.values[i] - spectrum.values[i]));
    CHECK(worst <= 1e-12);
}

TEST_CASE("real multipliers give conjugate-symmetric kernels") {
    Grid g;
    SampledField k = synthesize_kernel(gaussian_field({1.5, -0.5}), make_grid(16.0, 256));
    g = k.grid;
    const std::size_t n = g.n;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Complex mirror = k.at((n - i) % n, (n - j) % n);
            worst = std::max(worst, std::abs(mirror - std::conj(k.at(i, j))));
        }
    CHECK(worst <= 1e-15);
    // Bochner-Riesz on the square is real and even, so its kernel is real
    SampledField br = synthesize_kernel(bochner_riesz(square8(), 1.0, 1.0), make_grid(2.0, 128));
    double imag = 0.0;
    for (const auto& v : br.values) imag = std::max(imag, std::abs(v.imag()));
    CHECK(imag <= 1e-13 * max_abs(br));
}

TEST_CASE("synthesis refuses grids without a 2x frequency margin") {
    Grid g = make_grid(16.0, 128);  // extent 4 pi
    CHECK_THROWS_AS(synthesize_kernel(gaussian_field({0.0, 0.0}, 7.0), g), AliasingRisk);
    CHECK_NOTHROW(synthesize_kernel(gaussian_field({0.0, 0.0}, 6.0), g));
}

TEST_CASE("sector kernel: DFT synthesis matches the homogeneous-coordinate oracle") {
    auto domain = disc8();
    SymbolSpec a = make_symbol(-0.75, 0.25, 4);
    std::mt19937_64 rng(4);
    for (auto [k, sector] : {std::pair{5, 0}, std::pair{6, 3}}) {
        MultiplierField m = wave_multiplier(domain, a, k, true, sector);
        const std::size_t n = 2048;
        Grid g = make_grid(kPi * double(n) / (4.0 * m.support_radius), n);
        SampledField kernel = synthesize_kernel(m, g);
        const double peak = max_abs(kernel);
        std::uniform_int_distribution<std::size_t> index(0, n - 1);
        std::vector<Vec2> points;
        std::vector<Complex> fft;
        while (points.size() < 20) {
            std::size_t i = index(rng), j = index(rng);
            if (std::abs(kernel.at(i, j)) < 0.1 * peak) continue;
            points.push_back({g.x(i), g.x(j)});
            fft.push_back(kernel.at(i, j));
        }
        QuadratureOptions opt;
        opt.period = 2.0 * g.L;
        QuadratureStats stats;
        std::vector<Complex> quad = quadrature_kernel(domain, a, k, sector, points, opt, &stats);
        double worst = 0.0;
        for (std::size_t p = 0; p < points.size(); ++p)
            worst = std::max(worst, std::abs(fft[p] - quad[p]) / std::abs(quad[p]));
        CAPTURE(k);
        CHECK(worst <= 5e-3);
        CHECK(stats.nodes > 0);
    }
}

TEST_CASE("quadrature oracle: vanishing bands, conjugate phase and budget") {
    auto domain = disc8();
    SymbolSpec a = make_symbol(-0.75, 0.25, 4);
    std::vector<Vec2> points{{0.0, 0.0}, {300.0, -40.0}, {-2000.0, 100.0}};
    for (int k = 1; k <= 4; ++k)
        for (Complex v : quadrature_kernel(domain, a, k, 0, points)) CHECK(v == Complex(0.0));
    auto plus = quadrature_kernel(domain, a, 6, 2, points);
    QuadratureOptions conj;
    conj.phase_sign = -1.0;
    auto minus = quadrature_kernel(domain, a, 6, 2, points, conj);
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(std::abs(plus[i]) > 0.0);
        CHECK(std::abs(minus[i] - std::conj(plus[i])) <= 1e-15 * std::abs(plus[i]) + 1e-30);
    }
    QuadratureOptions tiny;
    tiny.max_nodes = 1000;
    CHECK_THROWS_AS(quadrature_kernel(domain, a, 6, 0, points, tiny), QuadratureBudget);
}

TEST_CASE("sector kernel decays across the singular direction faster than |x|^-3") {
    // Along x2' the phase s (gamma x2' + 1) is non-stationary, since gamma stays near -8.
    auto domain = disc8();
    SymbolSpec a = make_symbol(-0.75, 0.25, 4);
    std::vector<Vec2> points;
    for (int j = 0; j < 4; ++j) points.push_back({0.0, -1000.0 * std::ldexp(1.0, j)});
    auto values = quadrature_kernel(domain, a, 6, 0, points);
    for (std::size_t j = 1; j < values.size(); ++j) CHECK(std::abs(values[j]) <= std::abs(values[j - 1]) / 8.0);
}

TEST_CASE("decay experiment: flags vanishing bands and bounds the normalized sequence") {
    SymbolSpec disc_symbol = make_symbol(-0.75, 0.25, 4);
    SymbolSpec square_symbol = make_symbol(-0.25, 0.25, 4);
    for (auto [domain, a] : {std::pair{disc8(), disc_symbol}, std::pair{square8(), square_symbol}}) {
        DecayReport r = decay_experiment(domain, a, 1, 8, 512);
        REQUIRE(r.ks.size() == 8);
        double c_star = 0.0, low = 1e300;
        for (std::size_t i = 0; i < r.ks.size(); ++i) {
            int k = r.ks[i];
            CHECK(r.vanishing[i] == (k <= 4));
            if (r.vanishing[i]) {
                CHECK(r.norms[i] == 0.0);
                continue;
            }
            CHECK(r.norms[i] > 0.0);
            CHECK(r.normalized[i] == doctest::Approx(std::pow(2.0, k * 0.125) * r.norms[i]));
            CHECK(r.refine_err[i] < 0.05);
            c_star = std::max(c_star, r.normalized[i]);
            low = std::min(low, r.normalized[i]);
        }
        CHECK(r.c_star == c_star);
        CHECK(r.spread == doctest::Approx(c_star / low));
        CHECK(r.spread <= 10.0);
        CHECK(std::isfinite(r.slope));
    }
    CHECK_THROWS_AS(decay_experiment(disc8(), disc_symbol, 1, 4, 256), ConfigError);
}

TEST_CASE("atoms: sup and mean invariants over seeds and levels") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        int l = int(seed % 7);
        Atom a = make_atom(l, seed, 8 + int(seed % 3) * 4);
        double bound = std::ldexp(1.0, 2 * l);
        CHECK(a.sup() <= bound + 1e-12);
        CHECK(std::abs(a.integral()) <= 1e-10);
        CHECK(a.value_at({a.center.x + 0.51 * a.side(), a.center.y}) == 0.0);
    }
    Atom unit = make_atom(0, 9);
    CHECK(unit.sup() <= 1.0);
    for (int l = 0; l <= 6; ++l) CHECK(dilate_atom(unit, l).sup() == std::ldexp(unit.sup(), 2 * l));
    Atom haar = haar_atom(3);
    CHECK(haar.sup() == 64.0);
    CHECK(haar.integral() == 0.0);
    CHECK(haar.value_at({-0.01, 0.0}) == 64.0);
    CHECK(haar.value_at({0.01, 0.0}) == -64.0);
    CHECK_THROWS_AS(make_atom(2, 1, 4), CubeTooSmall);
    CHECK_THROWS_AS(haar_atom(0, {0, 0}, 6), CubeTooSmall);
}

TEST_CASE("atom transform agrees with a fine Riemann sum") {
    Atom a = make_atom(1, 3, 8, {0.3, -0.2});
    Grid g = make_grid(64.0, 64);
    SampledField t = atom_transform(a, g);
    const int sub = 64;  // samples per cell side
    const double step = a.cell() / sub;
    for (auto [i, j] : {std::pair<std::size_t, std::size_t>{32, 32}, {35, 30}, {40, 20}, {10, 50}}) {
        Vec2 xi{g.xi(i), g.xi(j)};
        Complex sum = 0.0;
        for (int p = 0; p < a.cells * sub; ++p)
            for (int q = 0; q < a.cells * sub; ++q) {
                Vec2 x{a.center.x - 0.5 * a.side() + (p + 0.5) * step, a.center.y - 0.5 * a.side() + (q + 0.5) * step};
                sum += a.value_at(x) * std::polar(step * step, -dot(x, xi));
            }
        CHECK(std::abs(sum - t.at(i, j)) <= 1e-5 * (1.0 + std::abs(t.at(i, j))));
    }
}

TEST_CASE("atom response: zero atom, linearity and translation covariance") {
    auto domain = disc8();
    SymbolSpec a = make_symbol(-0.5, 0.25, 4);
    Grid g = make_grid(256.0, 256);
    Atom zero = make_atom(0, 1);
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    CHECK(atom_response(domain, a, zero, g).l1 == 0.0);

    Atom atom = make_atom(2, 7);
    AtomResponse base = atom_response(domain, a, atom, g);
    CHECK(base.l1 > 0.0);
    Atom twice = atom;
    for (double& v : twice.values) v *= 2.0;
    CHECK(atom_response(domain, a, twice, g).l1 == doctest::Approx(2.0 * base.l1).epsilon(1e-14));

    const int di = 3, dj = -5;
    Atom moved = atom;
    moved.center = {di * g.h(), dj * g.h()};
    AtomResponse shifted = atom_response(domain, a, moved, g);
    const std::size_t n = g.n;
    double worst = 0.0, peak = max_abs(base.field);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Complex expected = base.field.at((i + n - di) % n, (j + n - dj + n) % n);
            worst = std::max(worst, std::abs(shifted.field.at(i, j) - expected));
        }
    CHECK(worst <= 1e-12 * peak);
    CHECK(shifted.l1 == doctest::Approx(base.l1).epsilon(1e-10));
    CHECK_THROWS_AS(atom_response(domain, a, atom, make_grid(4096.0, 256)), AliasingRisk);
}

TEST_CASE("log t grid spacing") {
    auto t = log_t_grid(0.5, 64.0, 8);
    CHECK(t.front() == 0.5);
    CHECK(t.back() == doctest::Approx(64.0));
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] / t[i - 1] <= std::exp2(1.0 / 8.0) * (1 + 1e-12));
    CHECK_THROWS_AS(log_t_grid(0.0, 1.0, 4), InvalidScale);
}

TEST_CASE("square function of a plane wave is sqrt(alpha / (2 (2 alpha - 1))) times it") {
    // |d/dt m_t(rho)|^2 t integrates to alpha^2 B(2, 2 alpha - 1) for every rho > 0.
    auto domain = disc8();
    Grid g = make_grid(16.0, 64);
    const std::size_t i0 = 40, j0 = 27;
    SampledField f{g, std::vector<Complex>(g.n * g.n)};
    Vec2 xi0{g.xi(i0), g.xi(j0)};
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j) f.at(i, j) = std::polar(1.0, xi0.x * g.x(i) + xi0.y * g.x(j));
    const double rho0 = domain->minkowski(xi0);
    struct Case { double alpha; int per_octave; double tol; };
    for (Case c : {Case{2.0, 16, 1e-3}, Case{1.5, 16, 1e-3}, Case{1.0, 256, 1e-2}}) {
        auto t = log_t_grid(rho0 / 2.0, rho0 * 4096.0, c.per_octave);
        SquareFunctionResult r = square_function(domain, f, c.alpha, t);
        double expected = std::sqrt(c.alpha / (2.0 * (2.0 * c.alpha - 1.0)));
        CAPTURE(c.alpha);
        CHECK(r.ratio == doctest::Approx(expected).epsilon(c.tol));
        CHECK(std::abs(r.g.values[123].real()) == doctest::Approx(expected).epsilon(c.tol));
    }
}

TEST_CASE("square function: zero input, t grid checks and vanishing for large t") {
    auto domain = disc8();
    Grid g = make_grid(32.0, 256);
    SampledField zero{g, std::vector<Complex>(g.n * g.n)};
    auto t = log_t_grid(0.25, 64.0, 8);
    SquareFunctionResult r = square_function(domain, zero, 1.0, t);
    CHECK(r.g_norm4 == 0.0);
    CHECK(r.ratio == 0.0);
    CHECK_THROWS_AS(square_function(domain, zero, 1.0, log_t_grid(0.25, 64.0, 2)), TGridTooCoarse);
    CHECK_THROWS_AS(square_function(domain, zero, 0.3, t), ConfigError);

    SampledField f = random_band_limited(domain, g, 0.5, 3);
    double previous = 1e300;
    for (double tmin : {1.0, 4.0, 16.0}) {
        SquareFunctionResult s = square_function(domain, f, 1.0, log_t_grid(tmin, 4096.0, 8));
        CHECK(s.g_norm4 < previous / 3.0);
        previous = s.g_norm4;
    }
}

TEST_CASE("random band-limited fields are seeded and band-limited") {
    auto domain = disc8();
    Grid g = make_grid(32.0, 512);
    SampledField a = random_band_limited(domain, g, 1.0, 5);
    SampledField b = random_band_limited(domain, g, 1.0, 5);
    SampledField c = random_band_limited(domain, g, 1.0, 6);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    SampledField spectrum = forward_transform(a);
    double outside = 0.0, inside = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j) {
            double rho = domain->minkowski({g.xi(i), g.xi(j)});
            double v = std::abs(spectrum.at(i, j));
            (rho >= 1.0 || rho <= 0.25 ? outside : inside) = std::max(rho >= 1.0 || rho <= 0.25 ? outside : inside, v);
        }
    CHECK(outside <= 1e-12 * inside);
    CHECK_THROWS_AS(random_band_limited(domain, make_grid(32.0, 32), 1.0, 1), AliasingRisk);
}

TEST_CASE("square function ratio is stable across random inputs on the ellipse") {
    auto ellipse = construct_domain(ellipse_spec(16.0, 8.0));
    Grid g = make_grid(16.0, 512);
    auto t = log_t_grid(1.0 / 16.0, 1024.0, 8);
    double lo = 1e300, hi = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        double ratio = square_function(ellipse, random_band_limited(ellipse, g, 1.0, seed), 1.0, t).ratio;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(hi / lo <= 2.0);
}
