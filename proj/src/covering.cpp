#include "qlab/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace qlab {

namespace {

// Scan piece parameters from `from` towards `to` for the first point whose
// distance to the line reaches delta; returns the crossing parameter.
template <class Dist>
std::optional<double> scan_piece(const BoundaryPiece& piece, double from, double to, double delta, Dist dist) {
    const int steps = piece.type == BoundaryPiece::Type::Segment ? 1 : 64;
    double prev = from;
    for (int s = 1; s <= steps; ++s) {
        double next = from + (to - from) * double(s) / steps;
        if (dist(piece.point(next)) >= delta) {
            double inside = prev, outside = next;
            for (int it = 0; it < 80 && std::abs(outside - inside) > 1e-16; ++it) {
                double mid = 0.5 * (inside + outside);
                if (dist(piece.point(mid)) < delta) inside = mid; else outside = mid;
            }
            return 0.5 * (inside + outside);
        }
        prev = next;
    }
    return std::nullopt;
}

}  // namespace

Cap cap_arc(const ConvexDomain& domain, double theta, double delta, std::optional<Vec2> normal) {
    if (!(delta > 0.0)) throw InvalidDelta("cap width must be positive");
    const double start = domain.wrap(theta);
    BoundaryLocation loc = domain.locate(start);
    Cap cap;
    cap.theta = start;
    cap.point = loc.point;
    cap.normal = normal ? normalized(*normal) : loc.normal_right;
    cap.delta = delta;
    const double level = dot(cap.point, cap.normal);
    auto dist = [&](Vec2 x) { return level - dot(x, cap.normal); };

    const auto& pieces = domain.pieces();
    const std::size_t count = pieces.size();

    // counterclockwise
    std::optional<double> hi;
    {
        std::size_t j = loc.piece;
        double from = loc.u;
        for (std::size_t pass = 0; pass <= count && !hi; ++pass) {
            double to = (pass == count) ? loc.u : 1.0;
            if (auto u = scan_piece(pieces[j], from, to, delta, dist)) {
                double a = angle_of(pieces[j].point(*u));
                hi = start + std::fmod(a - start + 2.0 * kTwoPi, kTwoPi);
            }
            j = (j + 1) % count;
            from = 0.0;
        }
    }
    // clockwise
    std::optional<double> lo;
    {
        std::size_t j = loc.piece;
        double from = loc.u;
        for (std::size_t pass = 0; pass <= count && !lo; ++pass) {
            double to = (pass == count) ? loc.u : 0.0;
            if (auto u = scan_piece(pieces[j], from, to, delta, dist)) {
                double a = angle_of(pieces[j].point(*u));
                lo = start - std::fmod(start - a + 2.0 * kTwoPi, kTwoPi);
            }
            j = (j + count - 1) % count;
            from = 1.0;
        }
    }
    if (!hi || !lo || *hi - *lo >= kTwoPi) {
        cap.full = true;
        cap.lo = start - kPi;
        cap.hi = start + kPi;
    } else {
        cap.lo = *lo;
        cap.hi = *hi;
    }
    return cap;
}

std::vector<std::size_t> min_circular_cover(const std::vector<std::pair<double, double>>& arcs) {
    const std::size_t n = arcs.size();
    if (n == 0) throw ResolutionTooCoarse("no arcs to cover the circle");
    for (std::size_t i = 0; i < n; ++i)
        if (arcs[i].second - arcs[i].first >= kTwoPi) return {i};

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> lo0(n), hi0(n);
    for (std::size_t i = 0; i < n; ++i) {
        double shift = kTwoPi * std::floor(arcs[i].first / kTwoPi);
        lo0[i] = arcs[i].first - shift;
        hi0[i] = arcs[i].second - shift;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lo0[a] < lo0[b]; });

    // doubled list sorted by lo
    const std::size_t m = 2 * n;
    std::vector<double> lo(m), hi(m);
    std::vector<std::size_t> origin(m);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = lo0[order[i]];
        hi[i] = hi0[order[i]];
        lo[i + n] = lo[i] + kTwoPi;
        hi[i + n] = hi[i] + kTwoPi;
        origin[i] = origin[i + n] = order[i];
    }
    std::vector<std::size_t> prefix_best(m);
    for (std::size_t i = 0; i < m; ++i)
        prefix_best[i] = (i == 0 || hi[i] > hi[prefix_best[i - 1]]) ? i : prefix_best[i - 1];

    // next[i]: the arc reaching furthest among those starting inside arc i
    int levels = 1;
    while ((std::size_t(1) << levels) < m) ++levels;
    std::vector<std::vector<std::size_t>> up(levels + 1, std::vector<std::size_t>(m));
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t reach = std::size_t(std::upper_bound(lo.begin(), lo.end(), hi[i]) - lo.begin());
        std::size_t best = prefix_best[reach - 1];
        up[0][i] = hi[best] > hi[i] ? best : i;
    }
    for (int b = 1; b <= levels; ++b)
        for (std::size_t i = 0; i < m; ++i) up[b][i] = up[b - 1][up[b - 1][i]];

    std::size_t best_start = n, best_count = std::numeric_limits<std::size_t>::max();
    for (std::size_t s = 0; s < n; ++s) {
        const double target = lo[s] + kTwoPi;
        std::size_t cur = s, used = 1;
        for (int b = levels; b >= 0; --b) {
            std::size_t cand = up[b][cur];
            if (hi[cand] < target) {
                cur = cand;
                used += std::size_t(1) << b;
            }
        }
        if (hi[cur] < target) {
            cur = up[0][cur];
            ++used;
        }
        if (hi[cur] < target) continue;
        if (used < best_count) {
            best_count = used;
            best_start = s;
        }
    }
    if (best_start == n) throw ResolutionTooCoarse("candidate caps leave a gap on the boundary");

    std::vector<std::size_t> chosen{origin[best_start]};
    std::size_t cur = best_start;
    const double target = lo[best_start] + kTwoPi;
    while (hi[cur] < target) {
        cur = up[0][cur];
        chosen.push_back(origin[cur]);
    }
    return chosen;
}

CoveringResult covering_number(const ConvexDomain& domain, double delta, int angles) {
    if (!(delta > 0.0)) throw InvalidDelta("cap width must be positive");
    if (angles < 3) throw ConfigError("covering needs at least 3 candidate angles");
    const double spacing = kTwoPi / angles;
    std::vector<Cap> candidates;
    std::vector<char> at_corner;
    candidates.reserve(std::size_t(angles) + 16);

    auto add_all = [&](double theta) {
        BoundaryLocation loc = domain.locate(theta);
        if (!loc.corner()) {
            candidates.push_back(cap_arc(domain, theta, delta, loc.normal_right));
            at_corner.push_back(0);
            return;
        }
        Vec2 bis = normalized(loc.normal_left + loc.normal_right);
        for (Vec2 n : {loc.normal_left, loc.normal_right, bis}) {
            candidates.push_back(cap_arc(domain, theta, delta, n));
            at_corner.push_back(1);
        }
    };
    const double base = domain.theta_start();
    for (int i = 0; i < angles; ++i) add_all(base + spacing * i);
    for (double c : domain.corner_angles()) add_all(c);

    // Caps anchored exactly at a corner are narrow for any grid (the bisecting
    // line touches the boundary only at the corner), so only smooth-point caps
    // are checked against the spacing.
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (at_corner[i]) continue;
        const Cap& c = candidates[i];
        if (!c.full && c.width() < 3.0 * spacing) {
            std::ostringstream os;
            os << "cap width " << c.width() << " at angle " << c.theta << " is below 3x the grid spacing "
               << spacing << " (" << angles << " angles)";
            throw ResolutionTooCoarse(os.str());
        }
    }

    CoveringResult result;
    result.delta = delta;
    result.angles = angles;
    result.candidates = candidates.size();
    std::vector<std::pair<double, double>> arcs;
    for (const auto& c : candidates) arcs.emplace_back(c.lo, c.hi);
    for (std::size_t i : min_circular_cover(arcs)) result.caps.push_back(candidates[i]);
    result.N = static_cast<int>(result.caps.size());
    return result;
}

DimensionFit kappa_estimate(const ConvexDomain& domain, int k_min, int k_max, int angles, bool auto_refine) {
    if (!(2 <= k_min && k_min < k_max && k_max <= 20))
        throw ConfigError("kappa_estimate needs 2 <= k_min < k_max <= 20");
    DimensionFit fit;
    int grid = angles;
    for (int k = k_min; k <= k_max; ++k) {
        const double delta = std::ldexp(1.0, -k);
        CoveringResult r;
        while (true) {
            try {
                r = covering_number(domain, delta, grid);
                break;
            } catch (const ResolutionTooCoarse&) {
                if (!auto_refine || grid >= (1 << 20)) throw;
                grid *= 2;
            }
        }
        fit.ks.push_back(k);
        fit.deltas.push_back(delta);
        fit.Ns.push_back(r.N);
        fit.angles.push_back(grid);
    }
    const std::size_t n = fit.ks.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += fit.ks[i];
        my += std::log2(double(fit.Ns[i]));
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = fit.ks[i] - mx;
        sxy += dx * (std::log2(double(fit.Ns[i])) - my);
        sxx += dx * dx;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::log2(double(fit.Ns[i])) - (fit.intercept + fit.slope * fit.ks[i]);
        fit.max_residual = std::max(fit.max_residual, std::abs(r));
    }
    fit.tail_slope = std::log2(double(fit.Ns[n - 1]) / double(fit.Ns[n - 2]));
    return fit;
}

}  // namespace qlab
