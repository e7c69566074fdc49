#pragma once

#include <optional>
#include <vector>

#include "qlab/geometry.hpp"

namespace qlab {

// Boundary points within distance delta of a supporting line through `point`.
// The arc is the polar-angle interval [lo, hi] with lo <= theta <= hi.
struct Cap {
    double theta = 0.0;
    Vec2 point;
    Vec2 normal;
    double delta = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool full = false;

    double width() const { return full ? kTwoPi : hi - lo; }
};

struct CoveringResult {
    double delta = 0.0;
    int N = 0;
    int angles = 0;       // angle grid actually used
    std::size_t candidates = 0;
    std::vector<Cap> caps;
};

struct DimensionFit {
    std::vector<int> ks;
    std::vector<double> deltas;
    std::vector<int> Ns;
    std::vector<int> angles;
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
    double tail_slope = 0.0;  // two-point slope over the last two k
};

// Cap at the boundary point of polar angle theta. Without an explicit normal
// the supporting line uses the counterclockwise-side tangent at corners.
Cap cap_arc(const ConvexDomain& domain, double theta, double delta,
            std::optional<Vec2> normal = std::nullopt);

// Candidate caps at `angles` uniform boundary angles plus every corner
// (left, right and bisecting supporting lines), then an exact minimum
// circular cover of the candidates.
CoveringResult covering_number(const ConvexDomain& domain, double delta, int angles = 4096);

// Minimum number of arcs covering the circle. Arcs are [lo, hi] with
// hi - lo < 2 pi. Returns the chosen indices; throws ResolutionTooCoarse
// when the arcs leave a gap.
std::vector<std::size_t> min_circular_cover(const std::vector<std::pair<double, double>>& arcs);

// Least-squares slope of log2 N(2^-k) against k for k in [k_min, k_max].
// With auto_refine the angle grid is doubled (up to 2^20) whenever a
// candidate cap is too narrow for it.
DimensionFit kappa_estimate(const ConvexDomain& domain, int k_min, int k_max, int angles = 4096,
                            bool auto_refine = true);

}  // namespace qlab
