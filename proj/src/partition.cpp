#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qlab/decomposition.hpp"

namespace qlab {

namespace {

constexpr double kSlopeTolerance = 1e-9;
// products equal to delta up to rounding count as flat
constexpr double kFlatRounding = 1e-12;

void require_convex(double left, double right, double t) {
    if (left > right + kSlopeTolerance * (1.0 + std::abs(right))) {
        std::ostringstream os;
        os << "left slope " << left << " exceeds right slope " << right << " at t = " << t;
        throw NonConvexArc(os.str());
    }
}

}  // namespace

FlatPartition flatness_partition(const BoundaryArc& arc, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw InvalidDelta("flatness partition needs delta in (0, 1]");
    FlatPartition fp;
    fp.delta = delta;
    fp.points.push_back(-1.0);
    const double min_step = std::ldexp(delta, -arc.M);
    double a = -1.0;
    while (a < 1.0) {
        const double base = arc.slope_right(a);
        if (a > -1.0) require_convex(arc.slope_left(a), base, a);
        auto product = [&](double t) { return (t - a) * (arc.slope_left(t) - base); };
        double next;
        const double at_end = product(1.0);
        if (at_end < -kSlopeTolerance * (1.0 - a)) {
            std::ostringstream os;
            os << "slope decreases between " << a << " and 1";
            throw NonConvexArc(os.str());
        }
        if (at_end <= delta * (1.0 + kFlatRounding)) {
            next = (a <= 1.0 - min_step) ? 1.0 : std::min(1.0, a + min_step);
        } else {
            // the product is nondecreasing in t: bisect for the infimum where it exceeds delta
            // to adjacent doubles, so the shortfall does not accumulate over many steps
            double lo = a, hi = 1.0;
            while (true) {
                double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                double p = product(mid);
                if (p < -kSlopeTolerance * (mid - a)) {
                    std::ostringstream os;
                    os << "slope decreases between " << a << " and " << mid;
                    throw NonConvexArc(os.str());
                }
                if (p > delta) hi = mid; else lo = mid;
            }
            next = lo > a ? lo : hi;
        }
        fp.points.push_back(next);
        a = next;
        if (fp.points.size() > (std::size_t(1) << 26)) throw BudgetExceeded("flatness partition exceeds 2^26 points");
    }
    return fp;
}

FlatCheck check_flat_partition(const BoundaryArc& arc, const FlatPartition& fp) {
    FlatCheck c;
    c.max_left_excess = -std::numeric_limits<double>::infinity();
    c.min_right_margin = std::numeric_limits<double>::infinity();
    const int Q = fp.Q();
    for (int j = 0; j < Q; ++j) {
        double a = fp.points[j], b = fp.points[j + 1];
        double base = arc.slope_right(a);
        c.max_left_excess = std::max(c.max_left_excess, (b - a) * (arc.slope_left(b) - base) - fp.delta * (1.0 + kFlatRounding));
        if (j < Q - 1) {
            double t = b + 1e-6;
            c.min_right_margin = std::min(c.min_right_margin, (t - a) * (arc.slope_left(t) - base) - fp.delta);
        }
    }
    if (Q < 2) c.min_right_margin = 0.0;
    c.ok = c.max_left_excess <= 0.0 && (Q < 2 || c.min_right_margin > 0.0);
    return c;
}

RefinedPartition refine_partition(const BoundaryArc& arc, const FlatPartition& fp) {
    (void)arc;
    if (fp.points.size() < 2) throw DomainError("refinement needs a partition with at least one interval");
    std::vector<double> A;
    for (std::size_t j = 0; j + 1 < fp.points.size(); ++j) {
        A.push_back(fp.points[j]);
        A.push_back(0.5 * (fp.points[j] + fp.points[j + 1]));
    }
    A.push_back(fp.points.back());

    std::vector<double> out;
    for (std::size_t i = 0; i < A.size(); ++i) {
        const double x = A[i];
        out.push_back(x);
        if (i == 0 || i + 1 == A.size()) continue;
        const double right = A[i + 1] - x, left = x - A[i - 1];
        // gaps that agree to rounding count as equal
        if (std::abs(right - left) <= 1e-9 * std::max(right, left)) continue;
        if (right > left) {
            double y = 0.5 * (x + A[i + 1]);
            out.push_back(y);
            while (y - x > left) {
                y = 0.5 * (y + x);
                out.push_back(y);
            }
        } else {
            double y = 0.5 * (x + A[i - 1]);
            out.push_back(y);
            while (x - y > right) {
                y = 0.5 * (y + x);
                out.push_back(y);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    RefinedPartition rp;
    rp.delta = fp.delta;
    rp.points = std::move(out);
    return rp;
}

RefinedCheck check_refined_partition(const BoundaryArc& arc, const RefinedPartition& rp) {
    RefinedCheck c;
    c.card = rp.points.size();
    const std::size_t n = rp.intervals();
    for (std::size_t j = 0; j < n; ++j) c.sum_delta_over_len += rp.delta / rp.length(j);
    for (std::size_t j = 1; j <= n; ++j) {
        double prev = rp.length(j - 1);
        double jump = arc.slope_left(rp.points[j]) - arc.slope_right(rp.points[j - 1]);
        c.max_slope_ratio = std::max(c.max_slope_ratio, jump * prev / rp.delta);
        if (j < n) c.max_comp_ratio = std::max({c.max_comp_ratio, rp.length(j) / prev, prev / rp.length(j)});
    }
    c.slope_ok = c.max_slope_ratio <= 1.0;
    c.coomp_ok = c.max_comp_ratio <= 8.0;
    return c;
}

}  // namespace qlab
