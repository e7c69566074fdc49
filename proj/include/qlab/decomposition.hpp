#pragma once

#include <cstdint>
#include <vector>

#include "qlab/geometry.hpp"

namespace qlab {

// Points -1 = a_0 < ... < a_Q = 1 splitting [-1, 1] into pieces on which the
// arc is delta-flat.
struct FlatPartition {
    double delta = 0.0;
    std::vector<double> points;
    int Q() const { return static_cast<int>(points.size()) - 1; }
};

FlatPartition flatness_partition(const BoundaryArc& arc, double delta);

struct FlatCheck {
    double max_left_excess = 0.0;   // max_j of (length * slope jump) - delta; must be <= 0
    double min_right_margin = 0.0;  // min over j < Q-1 of product just past a_{j+1}, minus delta; must be > 0
    bool ok = false;
};

FlatCheck check_flat_partition(const BoundaryArc& arc, const FlatPartition& fp);

// Refinement with comparable neighbouring lengths.
struct RefinedPartition {
    double delta = 0.0;
    std::vector<double> points;
    std::size_t intervals() const { return points.empty() ? 0 : points.size() - 1; }
    double length(std::size_t j) const { return points[j + 1] - points[j]; }
};

RefinedPartition refine_partition(const BoundaryArc& arc, const FlatPartition& fp);

struct RefinedCheck {
    double max_slope_ratio = 0.0;  // max (slope jump * previous length) / delta
    double max_comp_ratio = 0.0;   // max ratio of neighbouring lengths
    double sum_delta_over_len = 0.0;
    std::size_t card = 0;
    bool slope_ok = false;
    bool coomp_ok = false;
};

RefinedCheck check_refined_partition(const BoundaryArc& arc, const RefinedPartition& rp);

// Smooth curve matching the arc and its slope at every point of the flatness
// grid for delta = 2^-k: lines near grid points, constant-curvature joins,
// then mollification away from the grid.
class SmoothSurrogate {
public:
    SmoothSurrogate(const BoundaryArc& arc, int k);

    int k() const { return k_; }
    const FlatPartition& grid() const { return grid_; }
    // Half-width of the mollifier on each grid interval.
    std::vector<double> mollifier_widths() const;

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
    double d3(double t) const;

    // Piecewise curve before mollification, with its right derivative.
    double unsmoothed(double t) const;
    double unsmoothed_slope(double t) const;

private:
    struct Join {
        double x = 0.0, xp = 0.0, len = 0.0;
        double left = 0.0, right = 0.0;    // ends of the curved middle part
        double y_x = 0.0, y_xp = 0.0;      // arc values at the grid points
        double s_x = 0.0, s_xp = 0.0;      // slopes of the two lines
        bool straight = false;
        double chord_slope = 0.0;
        double y_left = 0.0, u_left = 0.0, radius = 0.0, sign = 1.0;  // circle relative to its left end
    };

    std::size_t join_index(double t) const;
    double join_value(const Join& j, double t) const;
    double join_slope(const Join& j, double t) const;
    // Convolution of the unsmoothed slope with the order-th derivative of
    // the mollifier (order 0 gives the smoothed slope).
    double convolve_slope(const Join& j, double t, int order) const;
    bool in_smoothing_window(const Join& j, double t) const;

    int k_;
    FlatPartition grid_;
    std::vector<Join> joins_;
    double tolerance_;
};

struct SurrogateReport {
    int k = 0;
    int l = 0;
    double max_p1 = 0.0;  // |gamma_k - gamma| at grid points
    double max_p2 = 0.0;  // |gamma_k' - gamma'| at grid points
    double p3 = 0.0;      // max_m sup_{J_m} |gamma_k''| |J_m|^2 2^k
    double p4 = 0.0;      // max_m int_{J_m} |gamma_k'''| |J_m|^2 2^k
    double p5 = 0.0;      // sup |gamma - gamma_k| 2^k
    double p6 = 0.0;      // max_m sup_{J_m} |gamma' - gamma_k'| |J_m| 2^k
    double p7 = 0.0;      // max_j int_{I_j*} |I_j| |gamma_k''| 2^l
    double p8 = 0.0;      // max_j sup_{I_j*} |gamma_k' - gamma'| |I_j| 2^l
    double cs_count = 0.0;  // max_j card{m : J_m in I_j*} / 2^{(k-l)/2}
    std::vector<double> p3_per_interval;
    std::vector<double> p4_per_interval;
};

SurrogateReport measure_surrogate(const BoundaryArc& arc, const SmoothSurrogate& s, int l,
                                  int samples_per_interval = 24);

// Inner approximation of a convex domain by a rounded inscribed polygon.
struct InnerApproximation {
    DomainPtr domain;
    int n = 0;
    std::size_t vertices = 0;
    double radius = 0.0;          // corner rounding radius
    double polygon_bound = 0.0;   // certified relative error of the polygon
    double rounding_bound = 0.0;  // certified relative error added by rounding
};

// Approximations for 1..n; element n-1 is the n-th. The polygons are nested
// and the radii nonincreasing, so the domains are nested.
std::vector<InnerApproximation> smooth_domain_approx_sequence(const DomainPtr& domain, int n);
InnerApproximation smooth_domain_approx(const DomainPtr& domain, int n);

// {x : |<x, n1> - c1| <= h1, |<x, n2> - c2| <= h2}
struct Parallelogram {
    Vec2 n1, n2;
    double c1 = 0.0, c2 = 0.0;
    double h1 = 0.0, h2 = 0.0;

    bool contains(Vec2 x) const;
    Vec2 center() const;
    double area() const;
    std::vector<Vec2> corners() const;
    // Largest t with t*u inside, for a unit direction u; the set must contain the origin.
    double radial(Vec2 u) const;
};

struct UnionMeasure {
    double measure = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    double radius = 0.0;  // sampling disc
};

// Monte Carlo area of a union of parallelograms over their bounding disc.
UnionMeasure union_measure(const std::vector<Parallelogram>& pieces, std::size_t samples, std::uint64_t seed,
                           int angular_bins = 4096);

// Parallelograms for one sector, in the original frame. With refined=false
// the unrefined flatness partition is used.
std::vector<Parallelogram> exceptional_parallelograms(const BoundaryArc& arc, int l, bool refined = true);

struct ExceptionalSet {
    int l = 0;
    double half_width = 0.0;
    std::vector<Parallelogram> pieces;
    UnionMeasure union_area;
};

// Union over the listed sectors (all 2^{2M} when empty).
ExceptionalSet exceptional_set(const DomainPtr& domain, int l, std::uint64_t seed,
                               std::size_t samples = 1000000, std::vector<int> sectors = {});

}  // namespace qlab
