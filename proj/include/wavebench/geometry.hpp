#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "wavebench/common.hpp"

namespace wb {

struct Disc {
    Vec2 center;
    double radius = 1.0;
};

struct Ellipse {
    Vec2 center;
    double rx = 1.0;
    double ry = 1.0;
};

struct Polygon {
    std::vector<Vec2> vertices;  // CCW, closed implicitly
};

using Shape = std::variant<Disc, Ellipse, Polygon>;

inline bool contains(const Disc& d, Vec2 p) {
    const Vec2 r = p - d.center;
    return dot(r, r) <= d.radius * d.radius;
}

inline bool contains(const Ellipse& e, Vec2 p) {
    const double u = (p.x - e.center.x) / e.rx;
    const double v = (p.y - e.center.y) / e.ry;
    return u * u + v * v <= 1.0;
}

inline bool contains(const Polygon& poly, Vec2 p) {
    // crossing-number test
    bool inside = false;
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            const double xint =
                v[j].x + (p.y - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

inline bool contains(const Shape& s, Vec2 p) {
    return std::visit([&](const auto& sh) { return contains(sh, p); }, s);
}

/// Dense polyline along the shape boundary, closed (first point not repeated).
inline std::vector<Vec2> boundary_polyline(const Shape& s, double max_seg) {
    std::vector<Vec2> pts;
    if (const auto* d = std::get_if<Disc>(&s)) {
        const int n = std::max(16, int(std::ceil(2.0 * pi * d->radius / max_seg)));
        pts.reserve(n);
        for (int i = 0; i < n; ++i) {
            const double a = 2.0 * pi * i / n;
            pts.push_back({d->center.x + d->radius * std::cos(a),
                           d->center.y + d->radius * std::sin(a)});
        }
    } else if (const auto* e = std::get_if<Ellipse>(&s)) {
        const double rmax = std::max(e->rx, e->ry);
        const int n = std::max(16, int(std::ceil(2.0 * pi * rmax / max_seg)));
        pts.reserve(n);
        for (int i = 0; i < n; ++i) {
            const double a = 2.0 * pi * i / n;
            pts.push_back({e->center.x + e->rx * std::cos(a),
                           e->center.y + e->ry * std::sin(a)});
        }
    } else {
        const auto& poly = std::get<Polygon>(s);
        const std::size_t n = poly.vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = poly.vertices[i];
            const Vec2 b = poly.vertices[(i + 1) % n];
            const double len = norm(b - a);
            const int m = std::max(1, int(std::ceil(len / max_seg)));
            for (int k = 0; k < m; ++k) pts.push_back(a + (b - a) * (double(k) / m));
        }
    }
    return pts;
}

inline double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + ab * t));
}

/// Unsigned distance to the shape boundary via brute-force polyline search.
inline double boundary_distance(const Shape& s, Vec2 p, double resolution) {
    if (const auto* d = std::get_if<Disc>(&s))
        return std::abs(norm(p - d->center) - d->radius);
    const auto pts = boundary_polyline(s, resolution);
    double best = std::numeric_limits<double>::max();
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, distance_to_segment(p, pts[i], pts[(i + 1) % n]));
    return best;
}

/// Signed distance: negative inside, positive outside.
inline double signed_distance(const Shape& s, Vec2 p, double resolution) {
    const double d = boundary_distance(s, p, resolution);
    return contains(s, p) ? -d : d;
}

inline double bounding_radius(const Shape& s, Vec2 origin = {0, 0}) {
    if (const auto* d = std::get_if<Disc>(&s))
        return norm(d->center - origin) + d->radius;
    if (const auto* e = std::get_if<Ellipse>(&s))
        return norm(e->center - origin) + std::max(e->rx, e->ry);
    const auto& poly = std::get<Polygon>(s);
    double r = 0.0;
    for (const auto& v : poly.vertices) r = std::max(r, norm(v - origin));
    return r;
}

inline Vec2 shape_centroid(const Shape& s) {
    if (const auto* d = std::get_if<Disc>(&s)) return d->center;
    if (const auto* e = std::get_if<Ellipse>(&s)) return e->center;
    const auto& poly = std::get<Polygon>(s);
    Vec2 c{0, 0};
    for (const auto& v : poly.vertices) c = c + v;
    return c * (1.0 / double(poly.vertices.size()));
}

inline double shape_diameter(const Shape& s) {
    if (const auto* d = std::get_if<Disc>(&s)) return 2.0 * d->radius;
    if (const auto* e = std::get_if<Ellipse>(&s)) return 2.0 * std::max(e->rx, e->ry);
    const auto& poly = std::get<Polygon>(s).vertices;
    double best = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        for (std::size_t j = i + 1; j < poly.size(); ++j)
            best = std::max(best, norm(poly[i] - poly[j]));
    return best;
}

struct RayHit {
    double t = 0.0;       // path length to the hit
    Vec2 point;
    Vec2 normal;          // unit, pointing away from the shape interior
};

/// First intersection of the ray origin + t*dir (t > eps) with the shape boundary.
inline std::optional<RayHit> intersect_ray(const Disc& d, Vec2 o, Vec2 dir,
                                           double eps) {
    const Vec2 oc = o - d.center;
    const double b = dot(oc, dir);
    const double c = dot(oc, oc) - d.radius * d.radius;
    const double disc = b * b - c;
    if (disc < 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    for (double t : {-b - sq, -b + sq}) {
        if (t > eps) {
            const Vec2 p = o + dir * t;
            return RayHit{t, p, normalized(p - d.center)};
        }
    }
    return std::nullopt;
}

inline std::optional<RayHit> intersect_ray(const Ellipse& e, Vec2 o, Vec2 dir,
                                           double eps) {
    // scale to a unit circle; rescale the hit parameter back
    const Vec2 os{(o.x - e.center.x) / e.rx, (o.y - e.center.y) / e.ry};
    const Vec2 ds{dir.x / e.rx, dir.y / e.ry};
    const double a = dot(ds, ds);
    const double b = dot(os, ds);
    const double c = dot(os, os) - 1.0;
    const double disc = b * b - a * c;
    if (disc < 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    for (double t : {(-b - sq) / a, (-b + sq) / a}) {
        if (t > eps) {
            const Vec2 p = o + dir * t;
            const Vec2 n = normalized({(p.x - e.center.x) / (e.rx * e.rx),
                                       (p.y - e.center.y) / (e.ry * e.ry)});
            return RayHit{t, p, n};
        }
    }
    return std::nullopt;
}

inline std::optional<RayHit> intersect_ray(const Polygon& poly, Vec2 o, Vec2 dir,
                                           double eps) {
    std::optional<RayHit> best;
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[i];
        const Vec2 b = v[(i + 1) % n];
        const Vec2 ab = b - a;
        const double denom = cross(dir, ab);
        if (std::abs(denom) < 1e-14) continue;
        // solve o + tt*dir = a + uu*ab
        const double tt = cross(a - o, ab) / denom;
        const double uu = cross(a - o, dir) / denom;
        if (tt > eps && uu >= 0.0 && uu <= 1.0) {
            if (!best || tt < best->t) {
                Vec2 nrm = normalized(Vec2{ab.y, -ab.x});  // outward for CCW
                best = RayHit{tt, o + dir * tt, nrm};
            }
        }
    }
    return best;
}

inline std::optional<RayHit> intersect_ray(const Shape& s, Vec2 o, Vec2 dir,
                                           double eps = 1e-9) {
    return std::visit([&](const auto& sh) { return intersect_ray(sh, o, dir, eps); }, s);
}

}  // namespace wb
