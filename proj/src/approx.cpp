#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qlab/decomposition.hpp"

namespace qlab {

namespace {

struct InscribedPolygon {
    std::vector<Vec2> vertices;
    double bound = 0.0;  // max over edges of apex height / chord distance
};

// Vertices of the domain at 2^j uniform polar angles plus every corner.
// Consecutive j give nested vertex sets.
InscribedPolygon inscribed_polygon(const ConvexDomain& domain, int j) {
    std::vector<double> angles;
    const std::size_t count = std::size_t(1) << j;
    const double base = domain.theta_start();
    for (std::size_t i = 0; i < count; ++i) angles.push_back(base + kTwoPi * double(i) / double(count));
    for (double c : domain.corner_angles()) angles.push_back(domain.wrap(c));
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                 angles.end());

    std::vector<BoundaryLocation> locs;
    for (double a : angles) locs.push_back(domain.locate(a));
    InscribedPolygon poly;
    for (const auto& l : locs) poly.vertices.push_back(l.point);

    const std::size_t n = locs.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& A = locs[i];
        const auto& B = locs[(i + 1) % n];
        Vec2 chord = B.point - A.point;
        double len = norm(chord);
        if (len == 0.0) continue;
        Vec2 nc = outward_normal(chord);
        double c = dot(A.point, nc);
        // the boundary between A and B lies in the triangle cut off by the
        // chord and the supporting lines at A (right side) and B (left side)
        Vec2 na = A.normal_right, nb = B.normal_left;
        double det = cross(na, nb);
        double height;
        if (std::abs(det) < 1e-14) {
            height = std::abs(dot(chord, na)) <= 1e-12 * len ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            double ca = dot(A.point, na), cb = dot(B.point, nb);
            Vec2 apex{(ca * nb.y - cb * na.y) / det, (na.x * cb - nb.x * ca) / det};
            height = std::max(0.0, dot(apex - A.point, nc));
        }
        poly.bound = std::max(poly.bound, height / c);
    }
    return poly;
}

// Largest rounding radius keeping the extra relative error below `target`,
// and leaving room on every edge for both tangent points.
double rounding_radius(const std::vector<Vec2>& v, double target, double& tan_max) {
    const std::size_t n = v.size();
    std::vector<Vec2> normals(n);
    std::vector<double> lengths(n);
    double inradius = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 e = v[(i + 1) % n] - v[i];
        lengths[i] = norm(e);
        normals[i] = outward_normal(e);
        inradius = std::min(inradius, dot(v[i], normals[i]));
    }
    std::vector<double> half_tan(n);  // tan of half the turn at vertex i
    tan_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a = normals[(i + n - 1) % n], b = normals[i];
        double turn = std::atan2(cross(a, b), dot(a, b));
        half_tan[i] = std::tan(0.5 * std::max(0.0, turn));
        tan_max = std::max(tan_max, half_tan[i]);
    }
    if (tan_max == 0.0) return std::numeric_limits<double>::infinity();
    double r_err = target * inradius / (2.0 * tan_max * (1.0 + target));
    double r_edge = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double t = half_tan[i] + half_tan[(i + 1) % n];
        if (t > 0.0) r_edge = std::min(r_edge, 0.5 * lengths[i] / t);
    }
    return std::min(r_err, r_edge);
}

}  // namespace

std::vector<InnerApproximation> smooth_domain_approx_sequence(const DomainPtr& domain, int n) {
    if (n < 1) throw ConfigError("approximation index must be >= 1");
    std::vector<InnerApproximation> out;
    int j = 3;
    double radius = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= n; ++m) {
        const double target = 0.99 * std::ldexp(1.0, -m - 2);
        InscribedPolygon poly;
        while (true) {
            if (j > 20) {
                std::ostringstream os;
                os << "inner polygon for n = " << m << " needs more than 2^20 vertices";
                throw BudgetExceeded(os.str());
            }
            poly = inscribed_polygon(*domain, j);
            if (poly.bound <= target) break;
            ++j;
        }
        double tan_max = 0.0;
        // the merged vertex list is what gets rounded
        auto merged = rounded_polygon_domain(poly.vertices, 0.0);
        const auto& verts = merged->spec().vertices;
        radius = std::min(radius, rounding_radius(verts, target, tan_max));
        InnerApproximation approx;
        approx.n = m;
        approx.vertices = verts.size();
        approx.radius = std::isfinite(radius) ? radius : 0.0;
        approx.polygon_bound = poly.bound;
        double inradius = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < verts.size(); ++i)
            inradius = std::min(inradius, dot(verts[i], outward_normal(verts[(i + 1) % verts.size()] - verts[i])));
        approx.rounding_bound = 2.0 * approx.radius * tan_max / (inradius - 2.0 * approx.radius * tan_max);
        approx.domain = rounded_polygon_domain(verts, approx.radius, DomainKind::CustomSupport);
        out.push_back(std::move(approx));
    }
    return out;
}

InnerApproximation smooth_domain_approx(const DomainPtr& domain, int n) {
    return smooth_domain_approx_sequence(domain, n).back();
}

}  // namespace qlab
