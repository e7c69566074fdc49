#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <map>

#include "qlab/kernels.hpp"

namespace qlab {

namespace {

using Rule = boost::math::quadrature::gauss<double, 20>;

// Gauss-Legendre nodes and weights for `panels` equal panels of [lo, hi].
void panel_nodes(double lo, double hi, std::size_t panels, std::vector<double>& x, std::vector<double>& w) {
    x.clear();
    w.clear();
    const double width = (hi - lo) / double(panels);
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    for (std::size_t p = 0; p < panels; ++p) {
        double mid = lo + (double(p) + 0.5) * width;
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            for (double sign : {-1.0, 1.0}) {
                if (abscissa[i] == 0.0 && sign > 0) continue;
                x.push_back(mid + sign * abscissa[i] * 0.5 * width);
                w.push_back(weights[i] * 0.5 * width);
            }
        }
    }
}

struct AlphaNodes {
    std::vector<double> alpha, gamma, weight;  // weight includes chi1 and the Jacobian factor
};

struct SNodes {
    std::vector<double> s, weight;  // weight includes a theta_k chi2 and s
};

}  // namespace

std::vector<Complex> quadrature_kernel(const DomainPtr& domain, const SymbolSpec& a, int k, int sector,
                                       const std::vector<Vec2>& points, const QuadratureOptions& opt,
                                       QuadratureStats* stats) {
    std::vector<Complex> out(points.size(), Complex(0.0));
    QuadratureStats local;
    DyadicCutoff theta = dyadic_cutoff(k, a.M);
    const double s_lo = std::max(theta.lower(), a.inner), s_hi = theta.upper();
    if (s_lo >= s_hi) {
        if (stats) *stats = local;
        return out;
    }
    BoundaryArc arc = boundary_arc(domain, SectorFrame{sector, a.M});
    const AngularCutoff chi{a.M, arc.rotation};
    const Vec2 w{std::cos(arc.rotation), -std::sin(arc.rotation)};
    const Vec2 wp{std::sin(arc.rotation), std::cos(arc.rotation)};

    // alpha / |(alpha, gamma)| is increasing, so chi1's support is an interval.
    const double edge = std::ldexp(1.0, -2 * a.M);
    auto direction = [&](double alpha) { return alpha / std::hypot(alpha, arc.gamma(alpha)); };
    auto solve = [&](double lo, double hi, double target) {
        for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
            double mid = 0.5 * (lo + hi);
            (direction(mid) < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double a_lo = solve(-1.0, 0.0, -edge), a_hi = solve(0.0, 1.0, edge);

    const double tol = opt.tolerance > 0.0 ? opt.tolerance : 1e-6 * std::ldexp(1.0, 2 * (k - 3 * a.M));
    const double prefactor = 1.0 / (4.0 * kPi * kPi);

    std::map<std::size_t, AlphaNodes> alpha_cache;
    std::map<std::size_t, SNodes> s_cache;
    auto alpha_nodes = [&](std::size_t panels) -> const AlphaNodes& {
        auto it = alpha_cache.find(panels);
        if (it != alpha_cache.end()) return it->second;
        AlphaNodes n;
        std::vector<double> x, wt;
        panel_nodes(a_lo, a_hi, panels, x, wt);
        for (std::size_t i = 0; i < x.size(); ++i) {
            double g = arc.gamma(x[i]);
            double jac = x[i] * arc.slope(x[i]) - g;
            n.alpha.push_back(x[i]);
            n.gamma.push_back(g);
            n.weight.push_back(wt[i] * chi.chi1(x[i] / std::hypot(x[i], g)) * jac);
        }
        return alpha_cache.emplace(panels, std::move(n)).first->second;
    };
    auto s_nodes = [&](std::size_t panels) -> const SNodes& {
        auto it = s_cache.find(panels);
        if (it != s_cache.end()) return it->second;
        SNodes n;
        std::vector<double> x, wt;
        panel_nodes(s_lo, s_hi, panels, x, wt);
        for (std::size_t i = 0; i < x.size(); ++i) {
            n.s.push_back(x[i]);
            n.weight.push_back(wt[i] * a(x[i]) * theta(x[i]) * chi.chi2(x[i]) * x[i]);
        }
        return s_cache.emplace(panels, std::move(n)).first->second;
    };

    // Phase-derivative bounds come from a coarse scan of the arc.
    std::vector<double> scan_alpha, scan_gamma, scan_slope;
    for (int i = 0; i <= 64; ++i) {
        double alpha = a_lo + (a_hi - a_lo) * i / 64.0;
        scan_alpha.push_back(alpha);
        scan_gamma.push_back(arc.gamma(alpha));
        scan_slope.push_back(arc.slope(alpha));
    }

    auto kernel_at = [&](double x1, double x2) {
        std::size_t used = 0;
        double rate_alpha = 0.0, rate_s = 0.0;
        for (std::size_t i = 0; i < scan_alpha.size(); ++i) {
            rate_alpha = std::max(rate_alpha, s_hi * std::abs(x1 + scan_slope[i] * x2));
            rate_s = std::max(rate_s, std::abs(scan_alpha[i] * x1 + scan_gamma[i] * x2 + 1.0));
        }
        // at least 16 nodes per period of the phase, at least 2 panels
        auto panels_for = [](double rate, double length) {
            double nodes = 16.0 * rate * length / kTwoPi;
            return std::max<std::size_t>(2, std::size_t(std::ceil(nodes / 20.0)));
        };
        std::size_t pa = panels_for(rate_alpha, a_hi - a_lo), ps = panels_for(rate_s, s_hi - s_lo);

        auto evaluate = [&](std::size_t na, std::size_t ns) {
            const AlphaNodes& an = alpha_nodes(na);
            const SNodes& sn = s_nodes(ns);
            local.nodes += an.alpha.size() * sn.s.size();
            used += an.alpha.size() * sn.s.size();
            if (used > opt.max_nodes)
                throw QuadratureBudget("quadrature oracle exceeded " + std::to_string(opt.max_nodes) + " nodes");
            Complex total = 0.0;
            for (std::size_t j = 0; j < sn.s.size(); ++j) {
                if (sn.weight[j] == 0.0) continue;
                const double s = sn.s[j];
                Complex inner = 0.0;
                for (std::size_t i = 0; i < an.alpha.size(); ++i) {
                    if (an.weight[i] == 0.0) continue;
                    double phase = s * (an.alpha[i] * x1 + an.gamma[i] * x2 + 1.0);
                    inner += an.weight[i] * std::polar(1.0, opt.phase_sign * phase);
                }
                total += sn.weight[j] * inner;
            }
            return prefactor * total;
        };

        Complex previous = evaluate(pa, ps);
        while (true) {
            pa *= 2;
            ps *= 2;
            Complex next = evaluate(pa, ps);
            double diff = std::abs(next - previous);
            previous = next;
            if (diff <= tol) {
                local.max_difference = std::max(local.max_difference, diff);
                return previous;
            }
        }
    };

    for (std::size_t p = 0; p < points.size(); ++p) {
        if (opt.period <= 0.0) {
            out[p] = kernel_at(dot(points[p], w), dot(points[p], wp));
            continue;
        }
        const double reach = (opt.images + 0.5) * opt.period;
        for (int i = -opt.images; i <= opt.images; ++i)
            for (int j = -opt.images; j <= opt.images; ++j) {
                Vec2 y{points[p].x + i * opt.period, points[p].y + j * opt.period};
                double x1 = dot(y, w), x2 = dot(y, wp);
                bool principal = i == 0 && j == 0;
                if (!principal && (std::abs(x2) > 0.125 * opt.period || std::abs(x1) > reach)) continue;
                out[p] += kernel_at(x1, x2);
            }
    }
    if (stats) *stats = local;
    return out;
}

}  // namespace qlab
