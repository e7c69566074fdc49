#include "qlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace qlab {

std::string to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::Polygon: return "polygon";
        case DomainKind::Disc: return "disc";
        case DomainKind::Cantor: return "cantor";
        case DomainKind::CustomSupport: return "custom-support";
    }
    return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
    if (name == "polygon") return DomainKind::Polygon;
    if (name == "disc") return DomainKind::Disc;
    if (name == "cantor") return DomainKind::Cantor;
    if (name == "custom-support") return DomainKind::CustomSupport;
    throw ConfigError("unknown domain kind '" + name + "'");
}

namespace {

void check_cantor_args(double t, double ratio, int depth) {
    if (!(t >= 0.0 && t <= 1.0))
        throw DomainError("cantor argument " + std::to_string(t) + " outside [0, 1]");
    if (!(ratio > 0.0 && ratio <= 0.5))
        throw DomainError("cantor ratio must lie in (0, 1/2]");
    if (depth < 1) throw DomainError("cantor depth must be >= 1");
}

// 1/ratio, snapped to an integer when it is one so that t*inv stays exact
// on dyadic inputs.
double inverse_ratio(double ratio) {
    double inv = 1.0 / ratio;
    double r = std::round(inv);
    return std::abs(inv - r) < 1e-12 ? r : inv;
}

}  // namespace

double cantor_function(double t, double ratio, int depth) {
    check_cantor_args(t, ratio, depth);
    const double inv = inverse_ratio(ratio);
    double acc = 0.0, weight = 1.0;
    for (int i = 0; i < depth; ++i) {
        if (t < ratio) {
            t *= inv;
        } else if (t <= 1.0 - ratio) {
            return acc + 0.5 * weight;
        } else {
            acc += 0.5 * weight;
            t = std::clamp(t * inv - (inv - 1.0), 0.0, 1.0);
        }
        weight *= 0.5;
    }
    return acc + weight * t;
}

double cantor_integral(double t, double ratio, int depth) {
    check_cantor_args(t, ratio, depth);
    const double inv = inverse_ratio(ratio);
    const double q = ratio;
    // G(t) = acc + mult * G(local t)
    double acc = 0.0, mult = 1.0;
    for (int i = 0; i < depth; ++i) {
        if (t < q) {
            mult *= 0.5 * q;
            t *= inv;
        } else if (t <= 1.0 - q) {
            return acc + mult * (0.25 * q + 0.5 * (t - q));
        } else {
            acc += mult * (0.25 * q + 0.5 * (1.0 - 2.0 * q) + 0.5 * (t - 1.0 + q));
            mult *= 0.5 * q;
            t = std::clamp(t * inv - (inv - 1.0), 0.0, 1.0);
        }
    }
    return acc + mult * 0.5 * t * t;
}

// ---------------------------------------------------------------------------

namespace {

// Wrap `phi` into the window of width 2 pi centred on `mid`.
double wrap_near(double phi, double mid) {
    return mid + std::remainder(phi - mid, kTwoPi);
}

// Safeguarded Newton for an increasing f on [0, 1].
template <class F, class DF>
double solve_increasing(F f, DF df) {
    double lo = 0.0, hi = 1.0;
    double flo = f(lo), fhi = f(hi);
    if (flo >= 0.0) return 0.0;
    if (fhi <= 0.0) return 1.0;
    double u = 0.5;
    for (int it = 0; it < 200; ++it) {
        double fu = f(u);
        if (fu == 0.0) return u;
        if (fu < 0.0) lo = u; else hi = u;
        if (hi - lo < 4e-16) break;
        double d = df(u);
        double next = (d > 0.0) ? u - fu / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        u = next;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Vec2 BoundaryPiece::point(double u) const {
    switch (type) {
        case Type::Segment: return a + u * (b - a);
        case Type::Arc: return center + radius * unit(phi0 + u * (phi1 - phi0));
        case Type::Graph:
            return scale * Vec2{u, cantor_integral(std::clamp(u, 0.0, 1.0), ratio, depth) - 1.0};
    }
    return {};
}

Vec2 BoundaryPiece::tangent(double u) const {
    switch (type) {
        case Type::Segment: return b - a;
        case Type::Arc: {
            double span = phi1 - phi0;
            double phi = phi0 + u * span;
            return radius * span * Vec2{-std::sin(phi), std::cos(phi)};
        }
        case Type::Graph:
            return scale * Vec2{1.0, cantor_function(std::clamp(u, 0.0, 1.0), ratio, depth)};
    }
    return {};
}

double BoundaryPiece::solve_ray(double theta) const {
    Vec2 d = unit(theta);
    switch (type) {
        case Type::Segment: {
            double denom = cross(d, b - a);
            if (denom == 0.0) return 0.0;
            return std::clamp(-cross(d, a) / denom, 0.0, 1.0);
        }
        case Type::Arc: {
            double dc = dot(d, center);
            double disc = dc * dc - dot(center, center) + radius * radius;
            double s = dc + std::sqrt(std::max(0.0, disc));
            double phi = angle_of(s * d - center);
            double mid = 0.5 * (phi0 + phi1);
            phi = wrap_near(phi, mid);
            return std::clamp((phi - phi0) / (phi1 - phi0), 0.0, 1.0);
        }
        case Type::Graph:
            return solve_increasing([&](double u) { return cross(d, point(u)); },
                                    [&](double u) { return cross(d, tangent(u)); });
    }
    return 0.0;
}

double BoundaryPiece::solve_level(Vec2 w, double level) const {
    switch (type) {
        case Type::Segment: {
            double denom = dot(b - a, w);
            if (denom == 0.0) return 0.0;
            return std::clamp((level - dot(a, w)) / denom, 0.0, 1.0);
        }
        case Type::Arc: {
            double c = std::clamp((level - dot(center, w)) / radius, -1.0, 1.0);
            double phi = angle_of(w) - std::acos(c);
            phi = wrap_near(phi, 0.5 * (phi0 + phi1));
            return std::clamp((phi - phi0) / (phi1 - phi0), 0.0, 1.0);
        }
        case Type::Graph:
            return solve_increasing([&](double u) { return dot(point(u), w) - level; },
                                    [&](double u) { return dot(tangent(u), w); });
    }
    return 0.0;
}

bool BoundaryLocation::corner() const {
    return std::abs(cross(normal_left, normal_right)) > 1e-12 ||
           dot(normal_left, normal_right) < 0.0;
}

// ---------------------------------------------------------------------------

namespace {

double min_distance(const BoundaryPiece& p) {
    switch (p.type) {
        case BoundaryPiece::Type::Segment: {
            Vec2 e = p.b - p.a;
            double u = std::clamp(-dot(p.a, e) / dot(e, e), 0.0, 1.0);
            return norm(p.point(u));
        }
        case BoundaryPiece::Type::Arc: {
            double best = std::min(norm(p.point(0.0)), norm(p.point(1.0)));
            if (norm(p.center) > 0.0) {
                double phi = wrap_near(angle_of(-p.center), 0.5 * (p.phi0 + p.phi1));
                if (phi >= p.phi0 && phi <= p.phi1)
                    best = std::min(best, norm(p.center + p.radius * unit(phi)));
            } else {
                best = p.radius;
            }
            return best;
        }
        case BoundaryPiece::Type::Graph: {
            const int n = 4000;
            int arg = 0;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= n; ++i) {
                double r = norm(p.point(double(i) / n));
                if (r < best) { best = r; arg = i; }
            }
            double lo = std::max(0.0, double(arg - 1) / n), hi = std::min(1.0, double(arg + 1) / n);
            for (int it = 0; it < 100; ++it) {
                double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                if (norm(p.point(m1)) < norm(p.point(m2))) hi = m2; else lo = m1;
            }
            return std::min(best, norm(p.point(0.5 * (lo + hi))));
        }
    }
    return 0.0;
}

double max_distance(const BoundaryPiece& p) {
    double best = std::max(norm(p.point(0.0)), norm(p.point(1.0)));
    switch (p.type) {
        case BoundaryPiece::Type::Segment: return best;
        case BoundaryPiece::Type::Arc: {
            if (norm(p.center) == 0.0) return p.radius;
            double phi = wrap_near(angle_of(p.center), 0.5 * (p.phi0 + p.phi1));
            if (phi >= p.phi0 && phi <= p.phi1) best = std::max(best, norm(p.center) + p.radius);
            return best;
        }
        case BoundaryPiece::Type::Graph: {
            const int n = 4000;
            for (int i = 0; i <= n; ++i) best = std::max(best, norm(p.point(double(i) / n)));
            return best;
        }
    }
    return best;
}

}  // namespace

int normalization_exponent(double circumscribed_radius) {
    int M = static_cast<int>(std::floor(std::log2(circumscribed_radius))) + 1;
    while (std::ldexp(1.0, M) <= circumscribed_radius) ++M;
    return std::max(M, 1);
}

ConvexDomain::ConvexDomain(DomainKind kind, DomainSpec spec, std::vector<BoundaryPiece> pieces)
    : kind_(kind), spec_(std::move(spec)), pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw DomainError("domain has no boundary pieces");
    double theta = angle_of(pieces_.front().point(0.0));
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        auto& p = pieces_[i];
        p.theta0 = theta;
        double end = angle_of(p.point(1.0));
        double delta = std::fmod(end - theta + 4.0 * kTwoPi, kTwoPi);
        if (pieces_.size() == 1 && delta < 1e-12) delta = kTwoPi;
        p.theta1 = theta + delta;
        theta = p.theta1;
        starts_.push_back(p.theta0);
    }
    double total = pieces_.back().theta1 - pieces_.front().theta0;
    if (std::abs(total - kTwoPi) > 1e-9) {
        std::ostringstream os;
        os << "boundary pieces sweep " << total << " rad instead of 2 pi";
        throw OriginNotInterior(os.str());
    }
    pieces_.back().theta1 = pieces_.front().theta0 + kTwoPi;

    inscribed_ = std::numeric_limits<double>::infinity();
    circumscribed_ = 0.0;
    for (const auto& p : pieces_) {
        inscribed_ = std::min(inscribed_, min_distance(p));
        circumscribed_ = std::max(circumscribed_, max_distance(p));
    }
    M_ = normalization_exponent(circumscribed_);
}

double ConvexDomain::wrap(double theta) const {
    double s = theta_start();
    double w = s + std::fmod(theta - s, kTwoPi);
    if (w < s) w += kTwoPi;
    if (w >= s + kTwoPi) w -= kTwoPi;
    return w;
}

BoundaryLocation ConvexDomain::locate(double theta) const {
    double t = wrap(theta);
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    std::size_t idx = (it == starts_.begin()) ? 0 : std::size_t(it - starts_.begin()) - 1;
    const auto& piece = pieces_[idx];
    BoundaryLocation loc;
    loc.piece = idx;
    loc.u = piece.solve_ray(t);
    loc.point = piece.point(loc.u);
    Vec2 n = outward_normal(piece.tangent(loc.u));
    loc.normal_left = loc.normal_right = n;
    const std::size_t count = pieces_.size();
    if (count > 1) {
        if (loc.u <= 1e-13)
            loc.normal_left = outward_normal(pieces_[(idx + count - 1) % count].tangent(1.0));
        if (loc.u >= 1.0 - 1e-13)
            loc.normal_right = outward_normal(pieces_[(idx + 1) % count].tangent(0.0));
    }
    return loc;
}

Vec2 ConvexDomain::boundary(double theta) const { return locate(theta).point; }

double ConvexDomain::radial(double theta) const {
    if (kind_ == DomainKind::Disc) return spec_.radius;
    return norm(boundary(theta));
}

double ConvexDomain::minkowski(Vec2 xi) const {
    double r = norm(xi);
    if (r == 0.0) return 0.0;
    return r / radial(angle_of(xi));
}

GradResult ConvexDomain::grad_rho(Vec2 xi) const {
    if (xi.x == 0.0 && xi.y == 0.0) throw ZeroArgument("gradient of rho at the origin");
    double theta = angle_of(xi);
    BoundaryLocation loc = locate(theta);
    // Rotate so the ray points straight down; there alpha = 0, gamma = -r.
    double frame = -0.5 * kPi - theta;
    // outward normal n -> counterclockwise tangent (-n.y, n.x)
    Vec2 tangent = rotate(Vec2{-loc.normal_right.y, loc.normal_right.x}, frame);
    double slope = tangent.y / tangent.x;
    double gamma = -norm(loc.point);
    double alpha = 0.0;
    Vec2 g_rot = Vec2{slope, -1.0} / (alpha * slope - gamma);
    return {rotate(g_rot, -frame), loc.corner()};
}

std::vector<double> ConvexDomain::corner_angles() const {
    std::vector<double> out;
    const std::size_t count = pieces_.size();
    if (count < 2) return out;
    for (std::size_t i = 0; i < count; ++i) {
        Vec2 nl = outward_normal(pieces_[(i + count - 1) % count].tangent(1.0));
        Vec2 nr = outward_normal(pieces_[i].tangent(0.0));
        if (std::abs(cross(nl, nr)) > 1e-12 || dot(nl, nr) < 0.0) out.push_back(pieces_[i].theta0);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Vec2> convex_ccw(std::vector<Vec2> v) {
    if (v.size() < 3) throw NonConvexInput("a polygon needs at least 3 vertices");
    double area = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) area += cross(v[i], v[(i + 1) % v.size()]);
    if (area < 0.0) std::reverse(v.begin(), v.end());
    std::vector<Vec2> out;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 prev = v[(i + n - 1) % n], cur = v[i], next = v[(i + 1) % n];
        double turn = cross(cur - prev, next - cur);
        double scale = norm(cur - prev) * norm(next - cur);
        if (turn < -1e-12 * scale) {
            std::ostringstream os;
            os << "vertex " << i << " (" << cur.x << ", " << cur.y << ") is reflex";
            throw NonConvexInput(os.str());
        }
        if (turn > 1e-14 * scale) out.push_back(cur);
    }
    if (out.size() < 3) throw NonConvexInput("vertices are collinear");
    double winding = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        Vec2 a = out[i], b = out[(i + 1) % out.size()];
        if (cross(a, b) <= 0.0) throw OriginNotInterior("the origin is not inside the polygon");
        winding += std::atan2(cross(a, b), dot(a, b));
    }
    if (std::abs(winding - kTwoPi) > 1e-6) throw NonConvexInput("polygon winds more than once");
    return out;
}

std::string scale_hint(double inscribed) {
    int j = static_cast<int>(std::ceil(std::log2(8.0 / inscribed)));
    std::ostringstream os;
    os << "inscribed radius " << inscribed << " < 8; scale the domain by " << std::ldexp(1.0, j);
    return os.str();
}

DomainPtr normalize(DomainPtr d) {
    if (d->inscribed_radius() < 8.0 * (1.0 - 1e-12)) throw NormalizationFailure(scale_hint(d->inscribed_radius()));
    if (d->M() > 62) throw NormalizationFailure("circumscribed radius needs M > 62");
    return d;
}

std::vector<BoundaryPiece> cantor_pieces(double scale, double ratio, int depth) {
    const Vec2 v[] = {{1.0, -0.5}, {1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {0.0, -1.0}};
    std::vector<BoundaryPiece> pieces;
    for (int i = 0; i < 4; ++i) {
        BoundaryPiece p;
        p.type = BoundaryPiece::Type::Segment;
        p.a = scale * v[i];
        p.b = scale * v[i + 1];
        pieces.push_back(p);
    }
    BoundaryPiece g;
    g.type = BoundaryPiece::Type::Graph;
    g.scale = scale;
    g.ratio = ratio;
    g.depth = depth;
    pieces.push_back(g);
    return pieces;
}

std::vector<Vec2> support_polygon(const std::vector<double>& h) {
    const std::size_t n = h.size();
    if (n < 3) throw NonConvexInput("custom-support needs at least 3 samples");
    for (double v : h)
        if (!(v > 0.0)) throw OriginNotInterior("support samples must be positive");
    const double step = kTwoPi / double(n);
    for (std::size_t i = 0; i < n; ++i) {
        double lhs = h[i] + h[(i + 2) % n];
        double rhs = 2.0 * std::cos(step) * h[(i + 1) % n];
        if (lhs < rhs - 1e-12 * rhs) {
            std::ostringstream os;
            os << "support sample " << (i + 1) % n << " violates h[i-1] + h[i+1] >= 2 cos(step) h[i]";
            throw NonConvexInput(os.str());
        }
    }
    std::vector<Vec2> v;
    for (std::size_t i = 0; i < n; ++i) {
        // intersection of <x, u_i> = h_i and <x, u_{i+1}> = h_{i+1}
        Vec2 u0 = unit(step * double(i)), u1 = unit(step * double(i + 1));
        double det = cross(u0, u1);
        double hi = h[i], hj = h[(i + 1) % n];
        v.push_back(Vec2{(hi * u1.y - hj * u0.y) / det, (hj * u0.x - hi * u1.x) / det});
    }
    // drop repeated vertices left by inactive constraints
    std::vector<Vec2> out;
    for (const auto& p : v)
        if (out.empty() || norm(p - out.back()) > 1e-12 * norm(p)) out.push_back(p);
    if (out.size() > 1 && norm(out.front() - out.back()) <= 1e-12 * norm(out.front())) out.pop_back();
    return out;
}

}  // namespace

DomainPtr rounded_polygon_domain(const std::vector<Vec2>& vertices, double r, DomainKind kind) {
    std::vector<Vec2> v = convex_ccw(vertices);
    const std::size_t n = v.size();
    std::vector<Vec2> normals(n);
    for (std::size_t i = 0; i < n; ++i) normals[i] = outward_normal(v[(i + 1) % n] - v[i]);
    std::vector<BoundaryPiece> pieces;
    if (r <= 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            BoundaryPiece p;
            p.a = v[i];
            p.b = v[(i + 1) % n];
            pieces.push_back(p);
        }
    } else {
        std::vector<Vec2> w(n);
        for (std::size_t i = 0; i < n; ++i) {
            Vec2 np = normals[(i + n - 1) % n], nc = normals[i];
            w[i] = v[i] - r * (np + nc) / (1.0 + dot(np, nc));
        }
        for (std::size_t i = 0; i < n; ++i) {
            Vec2 e = v[(i + 1) % n] - v[i];
            if (dot(w[(i + 1) % n] - w[i], e) <= 0.0)
                throw DomainError("rounding radius too large for polygon edge " + std::to_string(i));
        }
        for (std::size_t i = 0; i < n; ++i) {
            Vec2 np = normals[(i + n - 1) % n], nc = normals[i];
            double turn = std::atan2(cross(np, nc), dot(np, nc));
            if (turn > 1e-14) {
                BoundaryPiece arc;
                arc.type = BoundaryPiece::Type::Arc;
                arc.center = w[i];
                arc.radius = r;
                arc.phi0 = angle_of(np);
                arc.phi1 = arc.phi0 + turn;
                pieces.push_back(arc);
            }
            BoundaryPiece seg;
            seg.a = w[i] + r * nc;
            seg.b = w[(i + 1) % n] + r * nc;
            pieces.push_back(seg);
        }
    }
    DomainSpec spec;
    spec.kind = kind;
    spec.vertices = v;
    spec.radius = r;
    return std::make_shared<ConvexDomain>(kind, spec, std::move(pieces));
}

DomainSpec ellipse_spec(double a, double b, int samples) {
    if (!(a > 0.0 && b > 0.0)) throw ConfigError("ellipse semi-axes must be positive");
    if (samples < 3) throw ConfigError("need at least 3 support samples");
    DomainSpec spec;
    spec.kind = DomainKind::CustomSupport;
    for (int i = 0; i < samples; ++i) {
        double phi = kTwoPi * i / samples;
        spec.support.push_back(std::hypot(a * std::cos(phi), b * std::sin(phi)));
    }
    return spec;
}

DomainPtr construct_domain(const DomainSpec& spec) {
    switch (spec.kind) {
        case DomainKind::Disc: {
            if (!(spec.radius > 0.0)) throw NormalizationFailure("disc radius must be positive");
            BoundaryPiece arc;
            arc.type = BoundaryPiece::Type::Arc;
            arc.radius = spec.radius;
            arc.phi0 = -kPi;
            arc.phi1 = kPi;
            DomainSpec s = spec;
            s.vertices.clear();
            s.support.clear();
            return normalize(std::make_shared<ConvexDomain>(DomainKind::Disc, s, std::vector{arc}));
        }
        case DomainKind::Polygon: {
            auto d = rounded_polygon_domain(spec.vertices, 0.0, DomainKind::Polygon);
            return normalize(d);
        }
        case DomainKind::Cantor: {
            if (!(spec.ratio > 0.0 && spec.ratio <= 0.5))
                throw DomainError("cantor ratio must lie in (0, 1/2]");
            DomainSpec s = spec;
            s.vertices.clear();
            s.support.clear();
            ConvexDomain unit_domain(DomainKind::Cantor, s, cantor_pieces(1.0, spec.ratio, spec.depth));
            double scale = 1.0;
            while (scale * unit_domain.inscribed_radius() < 8.0) scale *= 2.0;
            s.radius = scale;
            return normalize(std::make_shared<ConvexDomain>(DomainKind::Cantor, s,
                                                            cantor_pieces(scale, spec.ratio, spec.depth)));
        }
        case DomainKind::CustomSupport: {
            auto d = rounded_polygon_domain(support_polygon(spec.support), 0.0, DomainKind::CustomSupport);
            DomainSpec s = d->spec();
            s.support = spec.support;
            auto with_spec = std::make_shared<ConvexDomain>(DomainKind::CustomSupport, s, d->pieces());
            return normalize(with_spec);
        }
    }
    throw ConfigError("unsupported domain kind");
}

// ---------------------------------------------------------------------------

DomainDiagnostics check_domain(const ConvexDomain& domain, int angles, int midpoint_pairs, unsigned seed) {
    DomainDiagnostics d;
    d.M = domain.M();
    d.inscribed = domain.inscribed_radius();
    d.circumscribed = domain.circumscribed_radius();
    const double upper = std::ldexp(1.0, d.M);
    const double step = kTwoPi / angles;
    std::vector<Vec2> pts(angles);
    for (int i = 0; i < angles; ++i) pts[i] = domain.boundary(step * i);
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (int i = 0; i < angles; ++i) {
        double r = norm(pts[i]);
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
        double jump = norm(pts[(i + 1) % angles] - pts[i]);
        d.max_lipschitz_ratio = std::max(d.max_lipschitz_ratio, jump / (std::ldexp(1.0, d.M + 2) * step));
    }
    if (rmin < 8.0 * (1.0 - 1e-12)) d.failures.push_back("boundary point closer than 8 to the origin");
    if (rmax >= upper) d.failures.push_back("boundary point at or beyond 2^M");
    if (d.max_lipschitz_ratio > 1.0) d.failures.push_back("adjacent boundary samples exceed the Lipschitz bound");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    d.convexity_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < midpoint_pairs; ++i) {
        Vec2 p = domain.boundary(ang(rng)), q = domain.boundary(ang(rng));
        Vec2 mid = 0.5 * (p + q);
        d.convexity_margin = std::min(d.convexity_margin, 1.0 - domain.minkowski(mid));
    }
    if (d.convexity_margin < -1e-9) d.failures.push_back("a boundary midpoint lies outside the domain");
    d.ok = d.failures.empty();
    return d;
}

double SectorFrame::angle() const { return kTwoPi * double(nu) / std::ldexp(1.0, 2 * M); }

namespace {

// Lower arc of a rotated domain as a list of boundary pieces ordered by x1.
struct DomainArc {
    DomainPtr domain;
    Vec2 w;   // first rotated coordinate: x1' = <x, w>
    Vec2 wp;  // second rotated coordinate
    std::vector<double> starts;
    std::vector<const BoundaryPiece*> pieces;
    bool smooth_pieces = true;

    DomainArc(DomainPtr d, double theta) : domain(std::move(d)) {
        w = Vec2{std::cos(theta), -std::sin(theta)};
        wp = Vec2{std::sin(theta), std::cos(theta)};
        auto x1 = [&](double psi) { return domain->radial(psi - theta) * std::cos(psi); };
        auto cross_at = [&](double lo, double hi, double level) {
            for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
                double mid = 0.5 * (lo + hi);
                if (x1(mid) < level) lo = mid; else hi = mid;
            }
            return 0.5 * (lo + hi);
        };
        double psi_lo = cross_at(-kPi, -0.5 * kPi, -1.0);
        double psi_hi = cross_at(-0.5 * kPi, 0.0, 1.0);
        std::size_t first = domain->locate(psi_lo - theta).piece;
        std::size_t last = domain->locate(psi_hi - theta).piece;
        const auto& all = domain->pieces();
        const std::size_t count = all.size();
        std::size_t i = first;
        while (true) {
            const auto* p = &all[i];
            double start = pieces.empty() ? -1.0 : dot(p->point(0.0), w);
            if (pieces.empty() || start < 1.0) {
                starts.push_back(start);
                pieces.push_back(p);
                if (p->type == BoundaryPiece::Type::Graph) smooth_pieces = false;
            }
            if (i == last) break;
            i = (i + 1) % count;
            if (i == first) break;
        }
    }

    std::size_t index(double t, bool left) const {
        // breakpoints within 1e-12 count as exact so corners resolve one-sidedly
        auto it = left ? std::lower_bound(starts.begin(), starts.end(), t - 1e-12)
                       : std::upper_bound(starts.begin(), starts.end(), t + 1e-12);
        return it == starts.begin() ? 0 : std::size_t(it - starts.begin()) - 1;
    }

    double gamma(double t) const {
        const auto* p = pieces[index(t, false)];
        return dot(p->point(p->solve_level(w, t)), wp);
    }

    double slope(double t, bool left) const {
        const auto* p = pieces[index(t, left)];
        Vec2 T = p->tangent(p->solve_level(w, t));
        return dot(T, wp) / dot(T, w);
    }

    double second(double t) const {
        const auto* p = pieces[index(t, false)];
        if (p->type != BoundaryPiece::Type::Arc) return 0.0;
        double c1 = dot(p->center, w);
        double r2 = p->radius * p->radius;
        double q = r2 - (t - c1) * (t - c1);
        return r2 / (q * std::sqrt(q));
    }
};

}  // namespace

BoundaryArc boundary_arc(DomainPtr domain, SectorFrame frame) {
    auto geom = std::make_shared<DomainArc>(domain, frame.angle());
    if (geom->pieces.empty()) throw DegenerateArc("no boundary piece meets the strip |x1| <= 1");
    BoundaryArc arc;
    arc.M = domain->M();
    arc.nu = frame.nu;
    arc.rotation = frame.angle();
    arc.label = to_string(domain->kind()) + " nu=" + std::to_string(frame.nu);
    arc.gamma = [geom](double t) { return geom->gamma(t); };
    arc.slope_left = [geom](double t) { return geom->slope(t, true); };
    arc.slope_right = [geom](double t) { return geom->slope(t, false); };
    if (geom->smooth_pieces) arc.curvature = [geom](double t) { return geom->second(t); };
    double g0 = arc.gamma(-1.0), g1 = arc.gamma(1.0);
    if (!(g0 < 0.0 && g1 < 0.0)) throw DegenerateArc("lower arc does not span [-1, 1]");
    return arc;
}

BoundaryArc arc_from_function(std::function<double(double)> gamma, int M,
                              std::function<double(double)> derivative,
                              std::function<double(double)> second, std::string label) {
    BoundaryArc arc;
    arc.M = M;
    arc.label = std::move(label);
    arc.gamma = gamma;
    if (derivative) {
        arc.slope_left = derivative;
        arc.slope_right = derivative;
    } else {
        constexpr double h = 1e-7;
        arc.slope_left = [gamma](double t) { return (gamma(t) - gamma(t - h)) / h; };
        arc.slope_right = [gamma](double t) { return (gamma(t + h) - gamma(t)) / h; };
    }
    arc.curvature = std::move(second);
    return arc;
}

ArcDiagnostics check_arc(const BoundaryArc& arc, int samples) {
    ArcDiagnostics d;
    d.min_abs_gamma = std::numeric_limits<double>::infinity();
    d.min_transversality = std::numeric_limits<double>::infinity();
    double prev_right = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        double t = -1.0 + 2.0 * i / (samples - 1);
        double g = arc.gamma(t);
        double sl = arc.slope_left(t), sr = arc.slope_right(t);
        d.min_abs_gamma = std::min(d.min_abs_gamma, std::abs(g));
        d.max_abs_gamma = std::max(d.max_abs_gamma, std::abs(g));
        d.max_abs_slope = std::max({d.max_abs_slope, std::abs(sl), std::abs(sr)});
        d.min_transversality = std::min({d.min_transversality, std::abs(t * sl - g), std::abs(t * sr - g)});
        d.max_monotonicity_violation = std::max({d.max_monotonicity_violation, sl - sr, prev_right - sl});
        prev_right = sr;
        if (g >= 0.0) d.min_abs_gamma = -1.0;
    }
    const double bound = std::ldexp(1.0, arc.M);
    d.ok = d.min_abs_gamma > 1.0 && d.max_abs_gamma < bound && d.max_abs_slope <= bound / 2.0 &&
           d.min_transversality >= std::ldexp(1.0, -4 * arc.M) && d.max_monotonicity_violation <= 1e-9;
    return d;
}

}  // namespace qlab
