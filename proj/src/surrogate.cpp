#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "qlab/decomposition.hpp"
#include "qlab/smooth.hpp"

namespace qlab {

namespace {

// The mollifier is flat to all orders at the ends of its support, which
// suits the double-exponential rule far better than Gauss-Kronrod.
template <class F>
double integrate(F f, double a, double b, double abs_tol, double& abs_err) {
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    double err = 0.0, l1 = 0.0;
    double v = rule.integrate(f, a, b, 1e-10, &err, &l1);
    // Boost reports the error of the rule mapped to [-1, 1]
    abs_err = err * 0.5 * (b - a);
    if (abs_err > abs_tol) {
        v = rule.integrate(f, a, b, 1e-14, &err, &l1);
        abs_err = err * 0.5 * (b - a);
    }
    return v;
}

double grid_slope(const BoundaryArc& arc, double x) {
    return x < 1.0 ? arc.slope_right(x) : arc.slope_left(1.0);
}

}  // namespace

SmoothSurrogate::SmoothSurrogate(const BoundaryArc& arc, int k) : k_(k) {
    if (k < 2) throw ConfigError("surrogate needs k >= 2");
    grid_ = flatness_partition(arc, std::ldexp(1.0, -k));
    tolerance_ = std::ldexp(1e-6, -k);
    const auto& pts = grid_.points;
    for (std::size_t m = 0; m + 1 < pts.size(); ++m) {
        Join j;
        j.x = pts[m];
        j.xp = pts[m + 1];
        j.len = j.xp - j.x;
        if (j.len < 64.0 * tolerance_) {
            std::ostringstream os;
            os << "grid interval [" << j.x << ", " << j.xp << "] is shorter than 64x the quadrature tolerance";
            throw ArcTooCoarse(os.str());
        }
        j.left = j.x + j.len / 100.0;
        j.right = j.xp - j.len / 100.0;
        j.y_x = arc.gamma(j.x);
        j.y_xp = arc.gamma(j.xp);
        j.s_x = grid_slope(arc, j.x);
        j.s_xp = grid_slope(arc, j.xp);
        // join (left, line at x) to (right, line at x+) by a circle tangent at the left end
        Vec2 pl{j.left, j.y_x + j.s_x * (j.left - j.x)};
        Vec2 pr{j.right, j.y_xp + j.s_xp * (j.right - j.xp)};
        Vec2 tangent = normalized(Vec2{1.0, j.s_x});
        Vec2 chord = pr - pl;
        double kappa = 2.0 * cross(tangent, chord) / dot(chord, chord);
        if (std::abs(kappa) < 1e-12) {
            j.straight = true;
            j.chord_slope = chord.y / chord.x;
        } else {
            // centre at pl + normal / kappa; u is the offset from the centre's abscissa
            j.y_left = pl.y;
            j.u_left = tangent.y / kappa;
            j.radius = 1.0 / std::abs(kappa);
            j.sign = kappa > 0.0 ? 1.0 : -1.0;
            if (std::abs(j.u_left + (j.right - j.left)) >= j.radius)
                throw DegenerateArc("constant-curvature join is not a graph over its interval");
        }
        joins_.push_back(j);
    }
}

std::vector<double> SmoothSurrogate::mollifier_widths() const {
    std::vector<double> w;
    for (const auto& j : joins_) w.push_back(j.len / 800.0);
    return w;
}

std::size_t SmoothSurrogate::join_index(double t) const {
    const auto& pts = grid_.points;
    auto it = std::upper_bound(pts.begin(), pts.end(), t);
    std::size_t idx = it == pts.begin() ? 0 : std::size_t(it - pts.begin()) - 1;
    return std::min(idx, joins_.size() - 1);
}

double SmoothSurrogate::join_value(const Join& j, double t) const {
    if (t <= j.left) return j.y_x + j.s_x * (t - j.x);
    if (t >= j.right) return j.y_xp + j.s_xp * (t - j.xp);
    if (j.straight) return j.y_x + j.s_x * (j.left - j.x) + j.chord_slope * (t - j.left);
    // y(t) - y(left) = sign (u^2 - u_left^2) / (root(u) + root(u_left)), free of
    // cancellation even for huge radii
    double h = t - j.left, u = j.u_left + h;
    auto root = [&](double v) { return std::sqrt((j.radius - v) * (j.radius + v)); };
    return j.y_left + j.sign * h * (u + j.u_left) / (root(u) + root(j.u_left));
}

double SmoothSurrogate::join_slope(const Join& j, double t) const {
    if (t < j.left) return j.s_x;
    if (t >= j.right) return j.s_xp;
    if (j.straight) return j.chord_slope;
    double u = j.u_left + (t - j.left);
    return j.sign * u / std::sqrt((j.radius - u) * (j.radius + u));
}

bool SmoothSurrogate::in_smoothing_window(const Join& j, double t) const {
    return t > j.x + j.len / 200.0 && t < j.xp - j.len / 200.0;
}

double SmoothSurrogate::unsmoothed(double t) const { return join_value(joins_[join_index(t)], t); }

double SmoothSurrogate::unsmoothed_slope(double t) const { return join_slope(joins_[join_index(t)], t); }

double SmoothSurrogate::convolve_slope(const Join& j, double t, int order) const {
    const double w = j.len / 800.0;
    const double base = join_slope(j, t);
    auto integrand = [&](double s) {
        double diff = join_slope(j, t - s) - base;
        if (diff == 0.0) return 0.0;
        switch (order) {
            case 0: return diff * smooth::mollifier(s, w);
            case 1: return diff * smooth::mollifier_derivative(s, w);
            default: return diff * smooth::mollifier_second_derivative(s, w);
        }
    };
    // split where the slope has kinks: t - s at the ends of the curved part
    std::vector<double> cuts{-w, w};
    for (double p : {t - j.left, t - j.right})
        if (p > -w && p < w) cuts.push_back(p);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0;
        // each derivative of the mollifier costs a factor of its width
        total += integrate(integrand, cuts[i], cuts[i + 1], tolerance_ / std::pow(w, order), err);
        if (order == 0 && err > tolerance_) throw QuadratureBudget("mollified slope did not reach the tolerance");
    }
    return order == 0 ? base + total : total;
}

double SmoothSurrogate::value(double t) const {
    const Join& j = joins_[join_index(t)];
    if (!in_smoothing_window(j, t)) return join_value(j, t);
    // gamma~ * psi, written as gamma~(t) plus the integral of the second-order
    // remainder so the quadrature only sees small numbers
    const double w = j.len / 800.0;
    const double base = join_value(j, t), slope = join_slope(j, t);
    auto integrand = [&](double s) {
        return (join_value(j, t - s) - base + s * slope) * smooth::mollifier(s, w);
    };
    std::vector<double> cuts{-w, w};
    for (double p : {t - j.left, t - j.right})
        if (p > -w && p < w) cuts.push_back(p);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0;
        total += integrate(integrand, cuts[i], cuts[i + 1], tolerance_, err);
        if (err > tolerance_) {
            std::ostringstream os;
            os << "mollified value at t = " << t << " has error estimate " << err << " above " << tolerance_;
            throw QuadratureBudget(os.str());
        }
    }
    return base + total;
}

double SmoothSurrogate::d1(double t) const {
    const Join& j = joins_[join_index(t)];
    if (!in_smoothing_window(j, t)) return join_slope(j, t);
    return convolve_slope(j, t, 0);
}

double SmoothSurrogate::d2(double t) const {
    const Join& j = joins_[join_index(t)];
    if (!in_smoothing_window(j, t)) return 0.0;
    return convolve_slope(j, t, 1);
}

double SmoothSurrogate::d3(double t) const {
    const Join& j = joins_[join_index(t)];
    if (!in_smoothing_window(j, t)) return 0.0;
    return convolve_slope(j, t, 2);
}

// ---------------------------------------------------------------------------

namespace {

struct Sample {
    double t, value, d1, d2, gamma, slope;
};

}  // namespace

SurrogateReport measure_surrogate(const BoundaryArc& arc, const SmoothSurrogate& s, int l, int samples) {
    if (l < 0 || l > s.k()) throw ConfigError("surrogate measurements need 0 <= l <= k");
    SurrogateReport rep;
    rep.k = s.k();
    rep.l = l;
    const double scale_k = std::ldexp(1.0, s.k());
    const auto& grid = s.grid().points;
    for (double x : grid) {
        rep.max_p1 = std::max(rep.max_p1, std::abs(s.value(x) - arc.gamma(x)));
        rep.max_p2 = std::max(rep.max_p2, std::abs(s.d1(x) - grid_slope(arc, x)));
    }

    // Samples: uniform across each grid interval plus dense runs over the two
    // places where the mollified curvature has bumps.
    std::vector<Sample> all;
    for (std::size_t m = 0; m + 1 < grid.size(); ++m) {
        const double x = grid[m], xp = grid[m + 1], len = xp - x;
        const double w = len / 800.0;
        std::vector<double> ts;
        for (int i = 0; i <= samples; ++i) ts.push_back(x + len * i / samples);
        for (double c : {x + len / 100.0, xp - len / 100.0})
            for (int i = 0; i <= samples; ++i) ts.push_back(c - 1.5 * w + 3.0 * w * i / samples);
        std::sort(ts.begin(), ts.end());
        double sup2 = 0.0, tv2 = 0.0, sup6 = 0.0, prev2 = 0.0;
        bool first = true;
        for (double t : ts) {
            if (t < x || t > xp) continue;
            Sample smp{t, s.value(t), s.d1(t), s.d2(t), arc.gamma(t), grid_slope(arc, t)};
            sup2 = std::max(sup2, std::abs(smp.d2));
            if (!first) tv2 += std::abs(smp.d2 - prev2);
            prev2 = smp.d2;
            first = false;
            sup6 = std::max(sup6, std::abs(smp.slope - smp.d1));
            rep.p5 = std::max(rep.p5, std::abs(smp.gamma - smp.value) * scale_k);
            all.push_back(smp);
        }
        double norm3 = len * len * scale_k;
        rep.p3_per_interval.push_back(sup2 * norm3);
        rep.p4_per_interval.push_back(tv2 * norm3);
        rep.p3 = std::max(rep.p3, sup2 * norm3);
        rep.p4 = std::max(rep.p4, tv2 * norm3);
        rep.p6 = std::max(rep.p6, sup6 * len * scale_k);
    }
    std::sort(all.begin(), all.end(), [](const Sample& a, const Sample& b) { return a.t < b.t; });

    const double scale_l = std::ldexp(1.0, l);
    RefinedPartition outer = refine_partition(arc, flatness_partition(arc, std::ldexp(1.0, -l)));
    for (std::size_t j = 0; j < outer.intervals(); ++j) {
        const double a = outer.points[j], b = outer.points[j + 1], len = b - a;
        const double mid = 0.5 * (a + b), half = 0.5 * len * 25.0 / 24.0;
        const double lo = std::max(-1.0, mid - half), hi = std::min(1.0, mid + half);
        auto first = std::lower_bound(all.begin(), all.end(), lo, [](const Sample& x, double t) { return x.t < t; });
        double tv1 = 0.0, sup8 = 0.0;
        const Sample* prev = nullptr;
        for (auto it = first; it != all.end() && it->t <= hi; ++it) {
            if (prev) tv1 += std::abs(it->d1 - prev->d1);
            prev = &*it;
            sup8 = std::max(sup8, std::abs(it->d1 - it->slope));
        }
        rep.p7 = std::max(rep.p7, len * tv1 * scale_l);
        rep.p8 = std::max(rep.p8, sup8 * len * scale_l);
        int inside = 0;
        for (std::size_t m = 0; m + 1 < grid.size(); ++m)
            if (grid[m] >= lo && grid[m + 1] <= hi) ++inside;
        rep.cs_count = std::max(rep.cs_count, inside / std::pow(2.0, 0.5 * (s.k() - l)));
    }
    return rep;
}

}  // namespace qlab
