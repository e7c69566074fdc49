#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "qlab/decomposition.hpp"

namespace qlab {

bool Parallelogram::contains(Vec2 x) const {
    return std::abs(dot(x, n1) - c1) <= h1 && std::abs(dot(x, n2) - c2) <= h2;
}

namespace {

Vec2 solve2(Vec2 n1, double c1, Vec2 n2, double c2) {
    double det = cross(n1, n2);
    return {(c1 * n2.y - c2 * n1.y) / det, (n1.x * c2 - n2.x * c1) / det};
}

}  // namespace

Vec2 Parallelogram::center() const { return solve2(n1, c1, n2, c2); }

double Parallelogram::area() const { return 4.0 * h1 * h2 / std::abs(cross(n1, n2)); }

std::vector<Vec2> Parallelogram::corners() const {
    return {solve2(n1, c1 + h1, n2, c2 + h2), solve2(n1, c1 - h1, n2, c2 + h2),
            solve2(n1, c1 - h1, n2, c2 - h2), solve2(n1, c1 + h1, n2, c2 - h2)};
}

double Parallelogram::radial(Vec2 u) const {
    double t = std::numeric_limits<double>::infinity();
    for (auto [n, c, h] : {std::tuple{n1, c1, h1}, std::tuple{n2, c2, h2}}) {
        double p = dot(u, n);
        if (p > 0.0) t = std::min(t, (c + h) / p);
        else if (p < 0.0) t = std::min(t, (c - h) / p);
    }
    return t;
}

UnionMeasure union_measure(const std::vector<Parallelogram>& pieces, std::size_t samples, std::uint64_t seed,
                           int angular_bins) {
    UnionMeasure out;
    out.samples = samples;
    if (pieces.empty() || samples == 0) return out;
    for (const auto& p : pieces)
        for (Vec2 c : p.corners()) out.radius = std::max(out.radius, norm(c));

    bool star = std::all_of(pieces.begin(), pieces.end(), [](const Parallelogram& p) { return p.contains({0.0, 0.0}); });
    if (!star) angular_bins = 1;

    // Draw every sample first, then resolve each angular bin against the
    // pieces that reach far enough in that bin.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit01(0.0, 1.0);
    std::vector<std::vector<std::pair<double, double>>> binned(angular_bins);  // (radius, angle)
    const double bin_width = kTwoPi / angular_bins;
    for (std::size_t i = 0; i < samples; ++i) {
        double r = out.radius * std::sqrt(unit01(rng));
        double phi = kTwoPi * unit01(rng);
        int b = std::min(angular_bins - 1, int(phi / bin_width));
        binned[b].emplace_back(r, phi);
    }

    std::vector<std::vector<double>> corner_angles(pieces.size());
    std::vector<std::vector<double>> corner_norms(pieces.size());
    for (std::size_t i = 0; i < pieces.size(); ++i)
        for (Vec2 c : pieces[i].corners()) {
            double a = std::atan2(c.y, c.x);
            if (a < 0) a += kTwoPi;
            corner_angles[i].push_back(a);
            corner_norms[i].push_back(norm(c));
        }

    std::size_t hits = 0;
    std::vector<std::pair<double, std::size_t>> reach(pieces.size());
    for (int b = 0; b < angular_bins; ++b) {
        auto& pts = binned[b];
        if (pts.empty()) continue;
        if (!star) {
            for (auto [r, phi] : pts) {
                Vec2 x = r * unit(phi);
                for (const auto& p : pieces)
                    if (p.contains(x)) {
                        ++hits;
                        break;
                    }
            }
            continue;
        }
        const double a0 = b * bin_width, a1 = a0 + bin_width;
        const Vec2 u0 = unit(a0), u1 = unit(a1);
        // For a convex set around the origin the radial function peaks over an
        // angular range at its ends or at a corner inside it.
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            double m = std::max(pieces[i].radial(u0), pieces[i].radial(u1));
            for (std::size_t c = 0; c < 4; ++c)
                if (corner_angles[i][c] >= a0 && corner_angles[i][c] <= a1) m = std::max(m, corner_norms[i][c]);
            reach[i] = {m, i};
        }
        std::sort(reach.begin(), reach.end(), std::greater<>());
        for (auto [r, phi] : pts) {
            Vec2 x = r * unit(phi);
            for (const auto& [m, i] : reach) {
                if (m < r) break;
                if (pieces[i].contains(x)) {
                    ++hits;
                    break;
                }
            }
        }
    }
    const double disc_area = kPi * out.radius * out.radius;
    const double f = double(hits) / double(samples);
    out.measure = f * disc_area;
    out.std_error = disc_area * std::sqrt(f * (1.0 - f) / double(samples));
    return out;
}

std::vector<Parallelogram> exceptional_parallelograms(const BoundaryArc& arc, int l, bool refined) {
    if (l < 0) throw ConfigError("exceptional set needs l >= 0");
    const double delta = std::ldexp(1.0, -l);
    const double half = std::ldexp(1.0, -l + 15 * arc.M);
    FlatPartition fp = flatness_partition(arc, std::min(1.0, delta));
    std::vector<double> pts = refined ? refine_partition(arc, fp).points : fp.points;
    const Vec2 w{std::cos(arc.rotation), -std::sin(arc.rotation)};
    const Vec2 wp{std::sin(arc.rotation), std::cos(arc.rotation)};
    std::vector<Parallelogram> out;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        const double len = pts[j + 1] - pts[j];
        const double alpha = 0.5 * (pts[j] + pts[j + 1]);
        const double g = arc.gamma(alpha), gp = arc.slope_right(alpha);
        Parallelogram p;
        p.n1 = alpha * w + g * wp;
        p.c1 = -1.0;
        p.h1 = half;
        p.n2 = w + gp * wp;
        p.c2 = 0.0;
        p.h2 = half / len;
        out.push_back(p);
    }
    return out;
}

ExceptionalSet exceptional_set(const DomainPtr& domain, int l, std::uint64_t seed, std::size_t samples,
                               std::vector<int> sectors) {
    const int M = domain->M();
    if (sectors.empty()) {
        sectors.resize(std::size_t(1) << (2 * M));
        std::iota(sectors.begin(), sectors.end(), 0);
    }
    ExceptionalSet set;
    set.l = l;
    set.half_width = std::ldexp(1.0, -l + 15 * M);
    for (int nu : sectors) {
        auto part = exceptional_parallelograms(boundary_arc(domain, SectorFrame{nu, M}), l);
        set.pieces.insert(set.pieces.end(), part.begin(), part.end());
    }
    set.union_area = union_measure(set.pieces, samples, seed);
    return set;
}

}  // namespace qlab
