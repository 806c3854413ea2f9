#pragma once

#include <optional>

#include "wavebench/grid.hpp"
#include "wavebench/scenario.hpp"

namespace wb {

enum class BcType { Dirichlet, Neumann };

enum CellFlag : std::uint8_t {
    kObstacle = 1,
    kOmegaStar = 2,
    kCollar = 4,     // delta-neighborhood of the control region
    kBallA = 8,
    kObstacleRim = 16,  // obstacle cell adjacent to fluid
};

/// Signed distance from p to the boundary of a shape, exact for discs and
/// polygons, polyline-based for ellipses. Negative inside.
inline double region_signed_distance(const Shape& s, Vec2 p, double resolution) {
    if (const auto* d = std::get_if<Disc>(&s))
        return norm(p - d->center) - d->radius;
    if (const auto* poly = std::get_if<Polygon>(&s)) {
        const auto& v = poly->vertices;
        double best = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < v.size(); ++i)
            best = std::min(best, distance_to_segment(p, v[i], v[(i + 1) % v.size()]));
        return contains(*poly, p) ? -best : best;
    }
    return signed_distance(s, p, resolution);
}

/// Rasterized domain: per-cell medium data, face coefficients, and masks.
struct ZoneMap {
    Grid grid;
    Scenario scenario;
    BcType obstacle_bc = BcType::Dirichlet;
    BcType box_bc = BcType::Dirichlet;

    std::vector<std::uint8_t> zone;   // 0 = obstacle, else medium 1..N0+1
    std::vector<std::uint8_t> flags;
    std::vector<double> speed;        // wave speed c
    std::vector<double> weight;       // 1/c^2, the L^2 weight of the operator
    std::vector<double> gxx, gxy, gyy;
    std::vector<double> fx;           // x-face coefficients, (nx+1) x ny
    std::vector<double> fy;           // y-face coefficients, nx x (ny+1)
    std::vector<double> sdist;        // signed distance to the control boundary
    double delta = 0.0;
    bool has_region = false;
    double max_speed_cells = 1.0;

    int fx_index(int i, int j) const { return j * (grid.nx + 1) + i; }
    int fy_index(int i, int j) const { return j * grid.nx + i; }

    bool is_fluid(int i, int j) const {
        return grid.in_bounds(i, j) && !(flags[std::size_t(grid.index(i, j))] & kObstacle);
    }
    bool has_flag(int i, int j, CellFlag f) const {
        return grid.in_bounds(i, j) && (flags[std::size_t(grid.index(i, j))] & f);
    }
    int fluid_cell_count() const {
        int n = 0;
        for (auto f : flags)
            if (!(f & kObstacle)) ++n;
        return n;
    }

    /// Time for a wavefront starting at radius r0 to reach the nearest box wall.
    /// Conservative: integrates the outward max speed shell by shell.
    double clean_horizon(double r0) const {
        const double r_wall = std::min(std::min(-grid.x0, grid.x_max()),
                                       std::min(-grid.y0, grid.y_max())) -
                              2.0 * grid.h;
        double r = r0, t = 0.0;
        const double dr = std::max(grid.h, (r_wall - r0) / 4096.0);
        while (r < r_wall) {
            const double c = scenario.max_speed_beyond(r);
            t += dr / c;
            r += dr;
        }
        return t;
    }
};

inline double harmonic_mean(double a, double b) {
    return (a > 0 && b > 0) ? 2.0 * a * b / (a + b) : 0.0;
}

namespace detail {

inline void check_gap(const Shape& a, const Shape& b, double min_gap,
                      const std::string& what) {
    const double res = min_gap / 8.0;
    const auto pts = boundary_polyline(a, std::max(res, 1e-3));
    double sep = std::numeric_limits<double>::max();
    for (const auto& p : pts) sep = std::min(sep, boundary_distance(b, p, res));
    if (sep < min_gap)
        throw UnresolvedGeometry(what + ": boundary gap " + std::to_string(sep) +
                                 " is below 4 cells (" + std::to_string(min_gap) + ")");
}

}  // namespace detail

inline ZoneMap build_zone_map(const Scenario& sc, double spacing,
                              BcType obstacle_bc = BcType::Dirichlet,
                              BcType box_bc = BcType::Dirichlet,
                              std::optional<BoxSpec> box_override = std::nullopt) {
    if (spacing <= 0) throw ConfigError("grid spacing must be > 0");
    const double min_gap = 4.0 * spacing;
    for (std::size_t k = 0; k + 1 < sc.zones.size(); ++k)
        detail::check_gap(sc.zones[k + 1], sc.zones[k], min_gap,
                          "zones " + std::to_string(k + 1) + "/" + std::to_string(k + 2));
    if (!sc.zones.empty())
        for (const auto& ob : sc.obstacles)
            detail::check_gap(ob, sc.zones.back(), min_gap, "obstacle vs innermost zone");
    for (std::size_t i = 0; i < sc.obstacles.size(); ++i)
        for (std::size_t j = i + 1; j < sc.obstacles.size(); ++j)
            detail::check_gap(sc.obstacles[i], sc.obstacles[j], min_gap,
                              "obstacle pair");

    ZoneMap zm;
    zm.scenario = sc;
    zm.obstacle_bc = obstacle_bc;
    zm.box_bc = box_bc;
    const BoxSpec box = box_override.value_or(sc.box);
    Grid g;
    g.h = spacing;
    g.x0 = box.x0;
    g.y0 = box.y0;
    g.nx = std::max(1, int(std::llround((box.x1 - box.x0) / spacing)));
    g.ny = std::max(1, int(std::llround((box.y1 - box.y0) / spacing)));
    zm.grid = g;

    const int n = g.size();
    zm.zone.assign(std::size_t(n), 0);
    zm.flags.assign(std::size_t(n), 0);
    zm.speed.assign(std::size_t(n), 1.0);
    zm.weight.assign(std::size_t(n), 1.0);
    zm.gxx.assign(std::size_t(n), 1.0);
    zm.gxy.assign(std::size_t(n), 0.0);
    zm.gyy.assign(std::size_t(n), 1.0);
    zm.sdist.assign(std::size_t(n), std::numeric_limits<double>::max());
    zm.has_region = sc.region.has_value();
    if (zm.has_region) zm.delta = sc.region_delta();

    const double res = spacing * 0.5;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = std::size_t(g.index(i, j));
            const Vec2 p = g.center(i, j);
            std::uint8_t fl = 0;
            if (sc.in_obstacle(p)) {
                fl |= kObstacle;
                zm.zone[k] = 0;
            } else {
                const int m = sc.medium_index(p);
                zm.zone[k] = std::uint8_t(m);
                if (m <= sc.zone_count()) {
                    const Medium& med = sc.media[std::size_t(m - 1)];
                    zm.speed[k] = med.speed.at(p);
                    zm.gxx[k] = med.g.xx;
                    zm.gxy[k] = med.g.xy;
                    zm.gyy[k] = med.g.yy;
                }
                zm.weight[k] = 1.0 / (zm.speed[k] * zm.speed[k]);
            }
            if (norm(p) <= sc.a) fl |= kBallA;
            if (zm.has_region) {
                const double d = region_signed_distance(sc.region->shape, p, res);
                zm.sdist[k] = d;
                if (!(fl & kObstacle)) {
                    if (d <= 0.0) fl |= kOmegaStar;
                    if (d < zm.delta) fl |= kCollar;
                }
            }
            zm.flags[k] = fl;
        }
    }
    // obstacle rim: obstacle cells with at least one fluid neighbor
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = std::size_t(g.index(i, j));
            if (!(zm.flags[k] & kObstacle)) continue;
            if (zm.is_fluid(i - 1, j) || zm.is_fluid(i + 1, j) || zm.is_fluid(i, j - 1) ||
                zm.is_fluid(i, j + 1))
                zm.flags[k] |= kObstacleRim;
        }

    // Face coefficients: harmonic mean across fluid-fluid faces. A Dirichlet
    // boundary face carries twice the fluid-side value: with a zero neighbor
    // read, that reproduces the antisymmetric ghost u_ghost = -u_in, placing
    // the wall on the face itself. Neumann faces vanish.
    zm.fx.assign(std::size_t((g.nx + 1) * g.ny), 0.0);
    zm.fy.assign(std::size_t(g.nx * (g.ny + 1)), 0.0);
    auto cell_gxx = [&](int i, int j) { return zm.gxx[std::size_t(g.index(i, j))]; };
    auto cell_gyy = [&](int i, int j) { return zm.gyy[std::size_t(g.index(i, j))]; };
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const bool lf = zm.is_fluid(i - 1, j);
            const bool rf = zm.is_fluid(i, j);
            double val = 0.0;
            if (lf && rf) {
                val = harmonic_mean(cell_gxx(i - 1, j), cell_gxx(i, j));
            } else if (lf != rf) {
                const bool wall = (i == 0 || i == g.nx);
                const BcType bc = wall ? box_bc : obstacle_bc;
                if (bc == BcType::Dirichlet)
                    val = 2.0 * (lf ? cell_gxx(i - 1, j) : cell_gxx(i, j));
            }
            zm.fx[std::size_t(zm.fx_index(i, j))] = val;
        }
    }
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const bool bf = zm.is_fluid(i, j - 1);
            const bool tf = zm.is_fluid(i, j);
            double val = 0.0;
            if (bf && tf) {
                val = harmonic_mean(cell_gyy(i, j - 1), cell_gyy(i, j));
            } else if (bf != tf) {
                const bool wall = (j == 0 || j == g.ny);
                const BcType bc = wall ? box_bc : obstacle_bc;
                if (bc == BcType::Dirichlet)
                    val = 2.0 * (bf ? cell_gyy(i, j - 1) : cell_gyy(i, j));
            }
            zm.fy[std::size_t(zm.fy_index(i, j))] = val;
        }
    }

    double cmax = 1.0;
    for (int k = 0; k < n; ++k)
        if (!(zm.flags[std::size_t(k)] & kObstacle)) {
            const Mat2 m{zm.gxx[std::size_t(k)], zm.gxy[std::size_t(k)],
                         zm.gyy[std::size_t(k)]};
            cmax = std::max(cmax, zm.speed[std::size_t(k)] * std::sqrt(m.max_eigenvalue()));
        }
    zm.max_speed_cells = cmax;
    return zm;
}

/// Smooth plateau field built from the signed distance to the control boundary:
/// 1 where sdist <= inner_frac*delta, 0 where sdist >= outer_frac*delta.
inline GridField cutoff_field(const ZoneMap& zm, double inner_frac, double outer_frac) {
    if (!zm.has_region) throw ConfigError("cutoff_field: scenario has no control region");
    if (!(inner_frac >= 0.0 && inner_frac < outer_frac && outer_frac <= 1.0))
        throw ConfigError("cutoff_field: need 0 <= inner < outer <= 1");
    const double lo = inner_frac * zm.delta;
    const double hi = outer_frac * zm.delta;
    if (hi - lo < 3.0 * zm.grid.h)
        throw DegenerateCollar("cutoff band " + std::to_string(hi - lo) +
                               " thinner than 3 cells");
    GridField phi(zm.grid);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double d = zm.sdist[k];
        phi[k] = 1.0 - smoothstep5((d - lo) / (hi - lo));
    }
    return phi;
}

}  // namespace wb
