#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "qlab/multipliers.hpp"
#include "qlab/smooth.hpp"

namespace qlab {

namespace {

// |hat m| below this fraction of its maximum is DFT rounding, not signal.
constexpr double kSpectrumFloor = 1e-12;

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

double norm_cutoff(double s) {
    double rise = smooth::step((s - 0.5) / 0.25);
    double fall = 1.0 - smooth::step((s - 1.5) / 0.5);
    return rise * fall;
}

ProfileFunction zero_profile() {
    ProfileFunction p;
    p.type = "zero";
    p.m = [](double) { return 0.0; };
    p.transform = [](double) { return Complex(0.0); };
    return p;
}

ProfileFunction bump_profile() {
    ProfileFunction p;
    p.type = "bump";
    p.m = [](double s) { return smooth::bump((s - 1.25) / 0.75); };
    return p;
}

ProfileFunction gaussian_modulated_profile(double center, double width, double frequency) {
    if (!(width > 0.0)) throw ConfigError("gaussian width must be positive");
    ProfileFunction p;
    p.type = "gaussian-modulated";
    p.m = [=](double s) {
        double u = (s - center) / width;
        return std::exp(-0.5 * u * u) * std::cos(frequency * (s - center)) * norm_cutoff(s);
    };
    return p;
}

ProfileFunction table_profile(std::vector<double> s, std::vector<double> values) {
    if (s.size() < 2 || s.size() != values.size()) throw ConfigError("table needs matching s and values, at least 2");
    if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end())
        throw ConfigError("table abscissae must be strictly increasing");
    ProfileFunction p;
    p.type = "table";
    p.support_lo = s.front();
    p.support_hi = s.back();
    p.m = [s = std::move(s), v = std::move(values)](double x) {
        if (x < s.front() || x > s.back()) return 0.0;
        auto it = std::upper_bound(s.begin(), s.end(), x);
        if (it == s.end()) return v.back();
        std::size_t i = std::size_t(it - s.begin()) - 1;
        double f = (x - s[i]) / (s[i + 1] - s[i]);
        return v[i] + f * (v[i + 1] - v[i]);
    };
    return p;
}

ProfileFunction transform_profile(std::string type, std::function<double(double)> m,
                                  std::function<Complex(double)> transform) {
    ProfileFunction p;
    p.type = std::move(type);
    p.m = std::move(m);
    p.transform = std::move(transform);
    p.support_lo = -std::numeric_limits<double>::infinity();
    p.support_hi = std::numeric_limits<double>::infinity();
    return p;
}

ProfileFunction scaled_profile(const ProfileFunction& p, double c) {
    ProfileFunction q = p;
    if (p.m) q.m = [m = p.m, c](double s) { return c * m(s); };
    if (p.transform) q.transform = [f = p.transform, c](double tau) { return c * f(tau); };
    return q;
}

ProfileFunction dilated_profile(const ProfileFunction& p, double t) {
    if (!(t > 0.0)) throw InvalidScale("dilation must be positive");
    ProfileFunction q = p;
    if (p.m) q.m = [m = p.m, t](double s) { return m(t * s); };
    if (p.transform) q.transform = [f = p.transform, t](double tau) { return f(tau / t) / t; };
    q.support_lo = p.support_lo / t;
    q.support_hi = p.support_hi / t;
    return q;
}

Spectrum profile_spectrum(const ProfileFunction& p, const SpectrumOptions& opt) {
    const double ds = opt.sample_step;
    const std::size_t samples = static_cast<std::size_t>(std::llround(opt.window / ds));
    const std::size_t N = opt.padded;
    if (!(ds > 0.0) || samples < 2 || N < samples || N % 2 != 0) throw ConfigError("bad spectrum grid");

    Spectrum out;
    out.dtau = kTwoPi / (double(N) * ds);
    const std::ptrdiff_t half = std::ptrdiff_t(N / 2) - 1;  // Nyquist dropped to keep the grid symmetric
    out.tau.reserve(std::size_t(2 * half + 1));
    for (std::ptrdiff_t k = -half; k <= half; ++k) out.tau.push_back(double(k) * out.dtau);

    if (p.transform) {
        out.values.reserve(out.tau.size());
        for (double tau : out.tau) out.values.push_back(p.transform(tau));
        return out;
    }
    if (!p.m) throw ConfigError("profile has neither m nor its transform");
    if (p.support_lo < 0.0 || p.support_hi > opt.window)
        throw ConfigError("profile support must lie inside the sampling window");

    std::unique_ptr<double, FftwDeleter> in(static_cast<double*>(fftw_malloc(sizeof(double) * N)));
    std::unique_ptr<fftw_complex, FftwDeleter> spec(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (N / 2 + 1))));
    fftw_plan plan = fftw_plan_dft_r2c_1d(int(N), in.get(), spec.get(), FFTW_ESTIMATE);
    std::fill(in.get(), in.get() + N, 0.0);
    for (std::size_t j = 0; j < samples; ++j) in.get()[j] = p.m(double(j) * ds) * ds;
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    out.values.resize(out.tau.size());
    for (std::ptrdiff_t k = 0; k <= half; ++k) {
        Complex v(spec.get()[k][0], spec.get()[k][1]);
        out.values[std::size_t(half + k)] = v;
        out.values[std::size_t(half - k)] = std::conj(v);
    }
    return out;
}

NormValue weighted_integral(const Spectrum& s, double exponent, double power) {
    const std::size_t n = s.tau.size();
    if (n < 21) throw ConfigError("spectrum grid too short");
    double peak = 0.0;
    for (const auto& v : s.values) peak = std::max(peak, std::abs(v));
    const double floor = kSpectrumFloor * peak;

    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        double a = std::abs(s.values[i]);
        f[i] = a <= floor ? 0.0 : std::pow(a, exponent) * std::pow(1.0 + std::abs(s.tau[i]), power);
    }
    NormValue out;
    for (std::size_t i = 0; i < n; ++i) out.value += (i == 0 || i + 1 == n ? 0.5 : 1.0) * f[i];
    out.value *= s.dtau;

    // Envelope over the two halves of the last decade, on both sides.
    const double T = std::abs(s.tau.back());
    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = std::abs(s.tau[i]);
        if (a < 0.1 * T) continue;
        if (a < T / std::sqrt(10.0)) first = std::max(first, f[i]);
        else second = std::max(second, f[i]);
    }
    if (second == 0.0) return out;
    if (!(second < first))
        throw TailNotDecaying("integrand does not decrease over the last decade of the tau grid");
    double decay = 2.0 * std::log10(first / second);
    if (decay <= 1.0)
        throw TailNotDecaying("integrand decays like |tau|^-" + std::to_string(decay) +
                              " over the last decade; the tail is not summable");
    out.tail_bound = 2.0 * second * T / (decay - 1.0);
    return out;
}

NormValue b_norm(const ProfileFunction& p, double kappa, double epsilon, const SpectrumOptions& opt) {
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be nonnegative");
    return weighted_integral(profile_spectrum(p, opt), 1.0, kappa + epsilon);
}

NormValue theta_norm(const ProfileFunction& p, double theta, double kappa, double epsilon,
                     const SpectrumOptions& opt) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be nonnegative");
    if (!p.m) throw ConfigError("interpolated norm needs the profile itself");
    const double exponent = 2.0 / (2.0 - theta);
    const double power = (2.0 * kappa + theta * (1.0 - 2.0 * kappa)) / (2.0 - theta) + epsilon;
    const double outer = (2.0 - theta) / 2.0;

    NormValue best;
    for (int j = -4; j <= 4; ++j) {
        const double t = std::ldexp(1.0, j);
        ProfileFunction g;
        g.type = "cutoff";
        g.m = [m = p.m, t](double s) { return norm_cutoff(s) * m(t * s); };
        NormValue raw = weighted_integral(profile_spectrum(g, opt), exponent, power);
        double value = std::pow(raw.value, outer);
        if (value >= best.value) {
            best.value = value;
            best.tail_bound = std::pow(raw.value + raw.tail_bound, outer) - value;
        }
    }
    return best;
}

SubordinationResult subordination_check(const DomainPtr& domain, const ProfileFunction& p,
                                        const std::vector<Vec2>& xs, const SpectrumOptions& opt) {
    if (!p.m) throw ConfigError("subordination needs the profile itself");
    Spectrum spec = profile_spectrum(p, opt);
    SubordinationResult out;
    out.tail_bound = weighted_integral(spec, 1.0, 0.0).tail_bound / kTwoPi;
    if (out.tail_bound > 1e-8) throw TailNotDecaying("transform tail bound exceeds 1e-8; widen the tau grid");

    const std::size_t n = spec.tau.size();
    constexpr std::size_t kReanchor = 512;
    for (Vec2 xi : xs) {
        double rho = domain->minkowski(xi);
        Complex step = std::polar(1.0, spec.dtau * rho);
        Complex phase;
        Complex sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // phase recurrence, re-anchored so rounding cannot drift
            if (i % kReanchor == 0) phase = std::polar(1.0, spec.tau[i] * rho);
            double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
            sum += w * spec.values[i] * phase;
            phase *= step;
        }
        Complex rhs = sum * spec.dtau / kTwoPi;
        out.max_error = std::max(out.max_error, std::abs(rhs - p.m(rho)));
        ++out.samples;
    }
    return out;
}

}  // namespace qlab
