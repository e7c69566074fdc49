#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qlab/errors.hpp"
#include "qlab/vec2.hpp"

namespace qlab {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

enum class DomainKind { Polygon, Disc, Cantor, CustomSupport };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

struct DomainSpec {
    DomainKind kind = DomainKind::Disc;
    std::vector<Vec2> vertices;   // polygon, counterclockwise or clockwise
    double radius = 8.0;          // disc
    double ratio = 1.0 / 3.0;     // cantor dissection ratio
    int depth = 40;               // cantor digit depth
    std::vector<double> support;  // custom-support samples h(2 pi i / n)
};

// Lebesgue function of the Cantor set with the given dissection ratio,
// by digit expansion. Throws DomainError outside [0, 1].
double cantor_function(double t, double ratio = 1.0 / 3.0, int depth = 40);
// Integral of cantor_function over [0, t].
double cantor_integral(double t, double ratio = 1.0 / 3.0, int depth = 40);

// One smooth piece of a domain boundary, traversed counterclockwise as its
// parameter u runs over [0, 1].
struct BoundaryPiece {
    enum class Type { Segment, Arc, Graph };
    Type type = Type::Segment;
    Vec2 a, b;                    // segment endpoints
    Vec2 center;                  // arc
    double radius = 0.0;
    double phi0 = 0.0, phi1 = 0.0;  // arc normal angles, phi1 > phi0
    double scale = 1.0;           // graph: scale * (u, G(u) - 1)
    double ratio = 1.0 / 3.0;
    int depth = 40;
    double theta0 = 0.0, theta1 = 0.0;  // polar angles of the endpoints, unwrapped

    Vec2 point(double u) const;
    // Counterclockwise tangent dP/du (not normalized).
    Vec2 tangent(double u) const;
    // Parameter where the ray at polar angle `theta` crosses the piece.
    double solve_ray(double theta) const;
    // Parameter where <P(u), w> = level, assuming it is increasing along the piece.
    double solve_level(Vec2 w, double level) const;
};

struct BoundaryLocation {
    std::size_t piece = 0;
    double u = 0.0;
    Vec2 point;
    Vec2 normal_left;   // outward normal approached clockwise
    Vec2 normal_right;  // outward normal approached counterclockwise
    bool corner() const;
};

struct GradResult {
    Vec2 grad;
    bool one_sided = false;
};

class ConvexDomain {
public:
    ConvexDomain(DomainKind kind, DomainSpec spec, std::vector<BoundaryPiece> pieces);

    DomainKind kind() const { return kind_; }
    const DomainSpec& spec() const { return spec_; }
    int M() const { return M_; }
    const std::vector<BoundaryPiece>& pieces() const { return pieces_; }

    BoundaryLocation locate(double theta) const;
    Vec2 boundary(double theta) const;
    double radial(double theta) const;
    double minkowski(Vec2 xi) const;
    GradResult grad_rho(Vec2 xi) const;

    double inscribed_radius() const { return inscribed_; }
    double circumscribed_radius() const { return circumscribed_; }
    // Polar angles where the outward normal jumps.
    std::vector<double> corner_angles() const;

    // Wrap an angle into [theta_start, theta_start + 2 pi).
    double wrap(double theta) const;
    double theta_start() const { return pieces_.front().theta0; }

private:
    DomainKind kind_;
    DomainSpec spec_;
    std::vector<BoundaryPiece> pieces_;
    std::vector<double> starts_;
    int M_ = 0;
    double inscribed_ = 0.0;
    double circumscribed_ = 0.0;
};

using DomainPtr = std::shared_ptr<const ConvexDomain>;

// Builds and normalizes a domain. The cantor domain is scaled by the smallest
// power of two that puts the radius-8 disc inside it.
DomainPtr construct_domain(const DomainSpec& spec);

// Custom-support spec sampling the ellipse x^2/a^2 + y^2/b^2 <= 1 at n angles.
DomainSpec ellipse_spec(double a, double b, int samples = 720);

// Boundary given as a polygon P (counterclockwise, convex, origin inside)
// opened by a disc of radius r: the union of all radius-r discs inside P.
// r = 0 gives P itself.
DomainPtr rounded_polygon_domain(const std::vector<Vec2>& vertices, double r,
                                 DomainKind kind = DomainKind::CustomSupport);

int normalization_exponent(double circumscribed_radius);

struct DomainDiagnostics {
    int M = 0;
    double inscribed = 0.0;
    double circumscribed = 0.0;
    double convexity_margin = 0.0;  // min over midpoint samples of 1 - rho
    double max_lipschitz_ratio = 0.0;
    bool ok = false;
    std::vector<std::string> failures;
};

DomainDiagnostics check_domain(const ConvexDomain& domain, int angles = 4096,
                               int midpoint_pairs = 2000, unsigned seed = 1);

struct SectorFrame {
    int nu = 0;
    int M = 4;
    double angle() const;
};

// Lower boundary t -> gamma(t), t in [-1, 1], of a rotated domain, with
// one-sided derivatives. gamma < 0 and 1 < |gamma| < 2^M.
struct BoundaryArc {
    std::function<double(double)> gamma;
    std::function<double(double)> slope_left;
    std::function<double(double)> slope_right;
    std::function<double(double)> curvature;  // gamma''; empty when unavailable
    int M = 4;
    int nu = 0;
    double rotation = 0.0;  // sector angle; arc coordinates are the domain rotated by it
    std::string label;

    double slope(double t) const { return slope_right(t); }
    bool has_second_derivative() const { return static_cast<bool>(curvature); }
};

BoundaryArc boundary_arc(DomainPtr domain, SectorFrame frame);

// Arc from a formula. Without an exact derivative, one-sided secants with
// step 1e-7 are used.
BoundaryArc arc_from_function(std::function<double(double)> gamma, int M,
                              std::function<double(double)> derivative = {},
                              std::function<double(double)> second = {},
                              std::string label = "function");

struct ArcDiagnostics {
    double min_abs_gamma = 0.0;
    double max_abs_gamma = 0.0;
    double max_abs_slope = 0.0;
    double min_transversality = 0.0;  // min |alpha gamma' - gamma|
    double max_monotonicity_violation = 0.0;
    bool ok = false;
};

ArcDiagnostics check_arc(const BoundaryArc& arc, int samples = 2001);

}  // namespace qlab
