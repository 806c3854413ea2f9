#pragma once

#include "wavebench/propagator.hpp"

namespace wb {

/// One smooth piece of the control boundary, carried as a dense polyline with
/// outward normals and an arclength parameterization.
struct BoundarySegment {
    int id = 0;
    bool obstacle_shared = false;  // coincides with the obstacle wall: no control
    bool crossing = false;         // spans more than one medium
    int zone_tag = 0;              // medium index when not crossing
    bool closed = false;
    double length = 0.0;
    std::vector<Vec2> pts;
    std::vector<Vec2> nrm;   // unit outward normal of the control region
    std::vector<double> cum;

    Vec2 point_at(double s) const {
        const auto [k, f] = locate(s);
        return pts[k] + (next(k) - pts[k]) * f;
    }
    Vec2 normal_at(double s) const {
        const auto [k, f] = locate(s);
        const Vec2 n = nrm[k] * (1.0 - f) + nrm[(k + 1) % nrm.size()] * f;
        return normalized(n);
    }
    /// Arclength of the closest backbone point; optional distance out.
    double project(Vec2 p, double* dist = nullptr) const {
        double best = std::numeric_limits<double>::max();
        double s_best = 0.0;
        const std::size_t n = pts.size();
        const std::size_t m = closed ? n : n - 1;
        for (std::size_t k = 0; k < m; ++k) {
            const Vec2 a = pts[k];
            const Vec2 b = next(k);
            const Vec2 ab = b - a;
            const double len2 = dot(ab, ab);
            double f = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
            const double d = norm(p - (a + ab * f));
            if (d < best) {
                best = d;
                s_best = cum[k] + f * std::sqrt(len2);
            }
        }
        if (dist) *dist = best;
        return s_best;
    }

private:
    Vec2 next(std::size_t k) const { return pts[(k + 1) % pts.size()]; }
    std::pair<std::size_t, double> locate(double s) const {
        if (closed) {
            s = std::fmod(s, length);
            if (s < 0) s += length;
        } else {
            s = std::clamp(s, 0.0, length);
        }
        std::size_t k = std::size_t(std::upper_bound(cum.begin(), cum.end(), s) -
                                    cum.begin());
        k = (k == 0) ? 0 : k - 1;
        if (k >= pts.size()) k = pts.size() - 1;
        const double seg = (closed || k + 1 < pts.size())
                               ? norm(next(k) - pts[k])
                               : 1.0;
        const double f = seg > 0 ? std::clamp((s - cum[k]) / seg, 0.0, 1.0) : 0.0;
        return {k, f};
    }
};

struct RegionGeometry {
    std::vector<BoundarySegment> segments;
    std::vector<Vec2> corners;

    double corner_distance(Vec2 p) const {
        double d = std::numeric_limits<double>::max();
        for (const auto& c : corners) d = std::min(d, norm(p - c));
        return d;
    }
};

namespace detail {

inline BoundarySegment polyline_segment(std::vector<Vec2> pts, std::vector<Vec2> nrm,
                                        bool closed) {
    BoundarySegment seg;
    seg.pts = std::move(pts);
    seg.nrm = std::move(nrm);
    seg.closed = closed;
    seg.cum.resize(seg.pts.size());
    double s = 0.0;
    for (std::size_t k = 0; k < seg.pts.size(); ++k) {
        seg.cum[k] = s;
        if (k + 1 < seg.pts.size())
            s += norm(seg.pts[k + 1] - seg.pts[k]);
        else if (closed)
            s += norm(seg.pts[0] - seg.pts[k]);
    }
    seg.length = closed ? s : seg.cum.back();
    return seg;
}

inline void tag_segment(BoundarySegment& seg, const Scenario& sc, double h) {
    int tag = -1;
    bool crossing = false;
    for (std::size_t k = 0; k < seg.pts.size(); ++k) {
        const Vec2 p = seg.pts[k] - seg.nrm[k] * (0.5 * h);
        if (sc.in_obstacle(p)) continue;
        const int m = sc.medium_index(p);
        if (tag < 0) tag = m;
        if (m != tag) crossing = true;
    }
    seg.crossing = crossing;
    seg.zone_tag = crossing ? 0 : std::max(tag, 1);
}

}  // namespace detail

/// Decompose the control boundary into smooth segments. Obstacles strictly
/// inside the region contribute shared wall segments that carry no control.
inline RegionGeometry build_region_geometry(const Scenario& sc, double h) {
    if (!sc.region) throw ConfigError("scenario has no control region");
    RegionGeometry geom;
    const double step = std::max(h / 4.0, 1e-4);
    int next_id = 0;

    const Shape& shape = sc.region->shape;
    if (const auto* poly = std::get_if<Polygon>(&shape)) {
        const auto& v = poly->vertices;
        for (std::size_t e = 0; e < v.size(); ++e) {
            const Vec2 a = v[e];
            const Vec2 b = v[(e + 1) % v.size()];
            const Vec2 n = normalized(Vec2{(b - a).y, -(b - a).x});
            const int m = std::max(2, int(std::ceil(norm(b - a) / step)) + 1);
            std::vector<Vec2> pts(static_cast<std::size_t>(m));
            std::vector<Vec2> nrm(static_cast<std::size_t>(m), n);
            for (int k = 0; k < m; ++k)
                pts[std::size_t(k)] = a + (b - a) * (double(k) / (m - 1));
            auto seg = detail::polyline_segment(std::move(pts), std::move(nrm), false);
            seg.id = next_id++;
            detail::tag_segment(seg, sc, h);
            geom.segments.push_back(std::move(seg));
            geom.corners.push_back(a);
        }
    } else {
        std::vector<Vec2> pts = boundary_polyline(shape, step);
        std::vector<Vec2> nrm(pts.size());
        if (const auto* d = std::get_if<Disc>(&shape)) {
            for (std::size_t k = 0; k < pts.size(); ++k)
                nrm[k] = normalized(pts[k] - d->center);
        } else {
            const auto& e = std::get<Ellipse>(shape);
            for (std::size_t k = 0; k < pts.size(); ++k)
                nrm[k] = normalized({(pts[k].x - e.center.x) / (e.rx * e.rx),
                                     (pts[k].y - e.center.y) / (e.ry * e.ry)});
        }
        auto seg = detail::polyline_segment(std::move(pts), std::move(nrm), true);
        seg.id = next_id++;
        detail::tag_segment(seg, sc, h);
        geom.segments.push_back(std::move(seg));
    }

    // obstacle walls inside the region: Dirichlet there, never controlled
    for (const auto& ob : sc.obstacles) {
        if (!contains(shape, shape_centroid(ob))) continue;
        std::vector<Vec2> pts = boundary_polyline(ob, step);
        if (!contains(shape, pts.front())) continue;
        std::vector<Vec2> nrm(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) {
            Vec2 outward;  // outward of the obstacle = into the fluid
            if (const auto* d = std::get_if<Disc>(&ob))
                outward = normalized(pts[k] - d->center);
            else if (const auto* e = std::get_if<Ellipse>(&ob))
                outward = normalized({(pts[k].x - e->center.x) / (e->rx * e->rx),
                                      (pts[k].y - e->center.y) / (e->ry * e->ry)});
            else
                outward = normalized(pts[k] - shape_centroid(ob));
            nrm[k] = -outward;  // outward of the control region points into K
        }
        auto seg = detail::polyline_segment(std::move(pts), std::move(nrm), true);
        seg.id = next_id++;
        seg.obstacle_shared = true;
        detail::tag_segment(seg, sc, h);
        geom.segments.push_back(std::move(seg));
    }
    return geom;
}

/// Robin trace samples on a uniform (s, t) lattice per smooth segment.
struct SegmentTrace {
    int segment_id = 0;
    double ds = 0.0;
    int n_s = 0;
    bool closed = false;
    std::vector<double> s;           // sample arclengths (cell-centered in s)
    std::vector<Vec2> points;
    std::vector<Vec2> normals;
    std::vector<std::uint8_t> censored;  // corner-adjacent samples carry g = 0
    std::vector<double> u, dnu, g;       // row-major [step][sample]
};

struct ControlSignal {
    double alpha = 1.0;
    double beta = 1.0;
    double t0 = 0.0;
    double dt = 0.0;
    int steps = 0;
    std::vector<SegmentTrace> segments;
    double l2_norm = 0.0;

    double value(const SegmentTrace& seg, int step, int sample) const {
        return seg.g[std::size_t(step) * std::size_t(seg.n_s) + std::size_t(sample)];
    }
};

namespace detail {

/// Field probe backed by a per-step history slab.
struct SlabProbe {
    const SolutionHistory& hist;
    const ZoneMap& zm;
    std::vector<int> slab_pos;  // cell -> position in slab, -1 if absent

    SlabProbe(const SolutionHistory& h, const ZoneMap& z) : hist(h), zm(z) {
        slab_pos.assign(std::size_t(zm.grid.size()), -1);
        for (std::size_t p = 0; p < hist.slab_cells.size(); ++p)
            slab_pos[std::size_t(hist.slab_cells[p])] = int(p);
    }

    double cell_value(int step, int i, int j) const {
        const Grid& g = zm.grid;
        if (!g.in_bounds(i, j)) return 0.0;
        const std::size_t k = std::size_t(g.index(i, j));
        if (zm.flags[k] & kObstacle) return 0.0;
        const int p = slab_pos[k];
        if (p < 0)
            throw TraceExtractionFailure("history slab does not cover cell (" +
                                         std::to_string(i) + "," + std::to_string(j) + ")");
        return hist.slab_values[std::size_t(step) * hist.slab_cells.size() +
                                std::size_t(p)];
    }

    double interp(int step, Vec2 p) const {
        const Grid& g = zm.grid;
        const double gx = (p.x - g.x0) / g.h - 0.5;
        const double gy = (p.y - g.y0) / g.h - 0.5;
        const int i0 = int(std::floor(gx));
        const int j0 = int(std::floor(gy));
        const double fx = gx - i0;
        const double fy = gy - j0;
        return (1 - fx) * (1 - fy) * cell_value(step, i0, j0) +
               fx * (1 - fy) * cell_value(step, i0 + 1, j0) +
               (1 - fx) * fy * cell_value(step, i0, j0 + 1) +
               fx * fy * cell_value(step, i0 + 1, j0 + 1);
    }

    Vec2 gradient(int step, Vec2 p) const {
        // bilinear blend of cell-centered central differences
        const Grid& g = zm.grid;
        const double gx = (p.x - g.x0) / g.h - 0.5;
        const double gy = (p.y - g.y0) / g.h - 0.5;
        const int i0 = int(std::floor(gx));
        const int j0 = int(std::floor(gy));
        const double fx = gx - i0;
        const double fy = gy - j0;
        auto cgrad = [&](int i, int j) -> Vec2 {
            return {(cell_value(step, i + 1, j) - cell_value(step, i - 1, j)) /
                        (2 * g.h),
                    (cell_value(step, i, j + 1) - cell_value(step, i, j - 1)) /
                        (2 * g.h)};
        };
        const Vec2 g00 = cgrad(i0, j0), g10 = cgrad(i0 + 1, j0);
        const Vec2 g01 = cgrad(i0, j0 + 1), g11 = cgrad(i0 + 1, j0 + 1);
        return g00 * ((1 - fx) * (1 - fy)) + g10 * (fx * (1 - fy)) +
               g01 * ((1 - fx) * fy) + g11 * (fx * fy);
    }
};

}  // namespace detail

/// Extract the Robin trace on every controlled segment of the boundary from a
/// recorded run. Values within 2h of a corner are censored to zero.
inline ControlSignal boundary_trace(const SolutionHistory& hist,
                                    const RegionGeometry& geom, const ZoneMap& zm,
                                    double alpha, double beta) {
    if (alpha == 0.0 && beta == 0.0)
        throw ConfigError("boundary_trace: alpha and beta are both zero");
    if (hist.slab_cells.empty() || hist.steps <= 0)
        throw TraceExtractionFailure("history carries no boundary slabs");
    const double h = zm.grid.h;
    detail::SlabProbe probe(hist, zm);

    ControlSignal sig;
    sig.alpha = alpha;
    sig.beta = beta;
    sig.t0 = hist.t0;
    sig.dt = hist.dt;
    sig.steps = hist.steps;

    double l2 = 0.0;
    for (const auto& bseg : geom.segments) {
        if (bseg.obstacle_shared) continue;
        SegmentTrace tr;
        tr.segment_id = bseg.id;
        tr.closed = bseg.closed;
        tr.n_s = std::max(4, int(std::llround(bseg.length / h)));
        tr.ds = bseg.length / tr.n_s;
        for (int i = 0; i < tr.n_s; ++i) {
            const double s = (i + 0.5) * tr.ds;
            const Vec2 x = bseg.point_at(s);
            tr.s.push_back(s);
            tr.points.push_back(x);
            tr.normals.push_back(bseg.normal_at(s));
            tr.censored.push_back(geom.corner_distance(x) <= 2.0 * h ? 1 : 0);
        }
        const int ns = tr.n_s;
        tr.u.resize(std::size_t(hist.steps + 1) * std::size_t(ns));
        tr.dnu.resize(tr.u.size());
        tr.g.resize(tr.u.size());
        for (int i = 0; i < ns; ++i) {
            const Vec2 nv = tr.normals[std::size_t(i)];
            const Vec2 xp = tr.points[std::size_t(i)] - nv * (0.5 * h);  // just inside
            Mat2 gt = Mat2::identity();
            if (!zm.scenario.in_obstacle(xp)) {
                const int m = zm.scenario.medium_index(xp);
                if (m <= zm.scenario.zone_count())
                    gt = zm.scenario.media[std::size_t(m - 1)].g;
            }
            for (int n = 0; n <= hist.steps; ++n) {
                const double uval = probe.interp(n, xp);
                const Vec2 grad = probe.gradient(n, xp);
                const double dn = nv.x * (gt.xx * grad.x + gt.xy * grad.y) +
                                  nv.y * (gt.xy * grad.x + gt.yy * grad.y);
                const std::size_t idx = std::size_t(n) * std::size_t(ns) + std::size_t(i);
                tr.u[idx] = uval;
                tr.dnu[idx] = dn;
                double gval = alpha * uval + beta * dn;
                if (tr.censored[std::size_t(i)]) gval = 0.0;
                tr.g[idx] = gval;
                l2 += gval * gval * tr.ds * hist.dt;
            }
        }
        sig.segments.push_back(std::move(tr));
    }
    sig.l2_norm = std::sqrt(l2);
    return sig;
}

/// Linear interpolation of the recorded g on a segment at (s, t).
inline double signal_value(const ControlSignal& sig, const SegmentTrace& tr, double s,
                           double t) {
    const double tf = (t - sig.t0) / sig.dt;
    int n0 = int(std::floor(tf));
    double ft = tf - n0;
    if (n0 < 0) {
        n0 = 0;
        ft = 0;
    }
    if (n0 >= sig.steps) {
        n0 = sig.steps - 1;
        ft = 1;
    }
    auto sample = [&](int step) {
        const double sf = s / tr.ds - 0.5;
        int i0 = int(std::floor(sf));
        double fs = sf - i0;
        int i1 = i0 + 1;
        if (tr.closed) {
            i0 = ((i0 % tr.n_s) + tr.n_s) % tr.n_s;
            i1 = (i0 + 1) % tr.n_s;
        } else {
            if (i0 < 0) {
                i0 = 0;
                i1 = 0;
                fs = 0;
            }
            if (i0 >= tr.n_s - 1) {
                i0 = tr.n_s - 1;
                i1 = tr.n_s - 1;
                fs = 0;
            }
        }
        const std::size_t base = std::size_t(step) * std::size_t(tr.n_s);
        return (1 - fs) * tr.g[base + std::size_t(i0)] +
               fs * tr.g[base + std::size_t(i1)];
    };
    return (1 - ft) * sample(n0) + ft * sample(n0 + 1);
}

}  // namespace wb
