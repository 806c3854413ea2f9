#pragma once

#include <random>

#include "wavebench/propagator.hpp"

namespace wb {

/// Initial/terminal data localized to the control region: position component
/// in the gradient-energy space, velocity component in the weighted L^2 space.
struct DataPair {
    GridField w0;
    GridField w1;

    DataPair() = default;
    explicit DataPair(const Grid& g) : w0(g), w1(g) {}

    DataPair& operator+=(const DataPair& o) {
        w0 += o.w0;
        w1 += o.w1;
        return *this;
    }
    DataPair& operator-=(const DataPair& o) {
        w0 -= o.w0;
        w1 -= o.w1;
        return *this;
    }
    DataPair& operator*=(double s) {
        w0 *= s;
        w1 *= s;
        return *this;
    }
};

inline DataPair operator+(DataPair a, const DataPair& b) { return a += b; }
inline DataPair operator-(DataPair a, const DataPair& b) { return a -= b; }
inline DataPair operator*(double s, DataPair a) { return a *= s; }

inline void restrict_to_region(const ZoneMap& zm, GridField& f) {
    for (std::size_t k = 0; k < f.size(); ++k)
        if (!(zm.flags[k] & kOmegaStar)) f.v[k] = 0.0;
}

inline DataPair restricted(const ZoneMap& zm, const State& s) {
    DataPair p;
    p.w0 = s.u;
    p.w1 = s.v;
    restrict_to_region(zm, p.w0);
    restrict_to_region(zm, p.w1);
    return p;
}

inline State as_state(const DataPair& p, double t = 0.0) {
    State s;
    s.u = p.w0;
    s.v = p.w1;
    s.time_stamp = t;
    return s;
}

/// Energy norm of the zero-extension of the pair (gradient part picks up the
/// jump across the region boundary, matching the embedding by zero-extension).
inline double pair_norm(const DataPair& p, const ZoneMap& zm) {
    return std::sqrt(energy(as_state(p), Region::All, zm));
}

/// C-infinity bump: amp * exp(1 - 1/(1-s^2)) for s = |x-c|/r < 1, else 0.
inline void add_bump(GridField& f, Vec2 center, double radius, double amp) {
    const Grid& g = f.grid;
    int i0, j0, i1, j1;
    g.locate({center.x - radius, center.y - radius}, i0, j0);
    g.locate({center.x + radius, center.y + radius}, i1, j1);
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const Vec2 p = g.center(i, j);
            const double s2 = dot(p - center, p - center) / (radius * radius);
            if (s2 < 1.0)
                f(i, j) += amp * std::exp(1.0 - 1.0 / (1.0 - s2));
        }
}

/// Random compactly supported smooth data inside the control region,
/// normalized to unit pair norm. The construction depends only on the region
/// geometry and the seed, never on the grid, so refinement studies see the
/// same data at every spacing.
inline DataPair random_pair(const ZoneMap& zm, unsigned seed, int n_bumps = 2) {
    if (!zm.has_region) throw ConfigError("random_pair: no control region");
    const Scenario& sc = zm.scenario;
    const Shape& shape = sc.region->shape;
    const double res = 0.01 * shape_diameter(shape);

    // inradius of the fluid part of the region, probed on a fixed lattice
    const Vec2 c0 = shape_centroid(shape);
    const double rad = 0.55 * shape_diameter(shape);
    double depth = 0.0;
    for (int j = 0; j < 48; ++j)
        for (int i = 0; i < 48; ++i) {
            const Vec2 p{c0.x - rad + 2 * rad * (i + 0.5) / 48,
                         c0.y - rad + 2 * rad * (j + 0.5) / 48};
            if (sc.in_obstacle(p)) continue;
            double d = -region_signed_distance(shape, p, res);
            for (const auto& ob : sc.obstacles)
                d = std::min(d, boundary_distance(ob, p, res));
            depth = std::max(depth, d);
        }
    if (depth <= 0) throw ConfigError("random_pair: degenerate control region");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double margin = 0.08 * depth;
    DataPair p(zm.grid);
    double min_r = depth;
    auto place = [&](GridField& f) {
        for (int b = 0; b < n_bumps; ++b) {
            const double r = (0.35 + 0.20 * uni(rng)) * depth;
            Vec2 c{};
            bool ok = false;
            for (int tries = 0; tries < 20000 && !ok; ++tries) {
                c = {c0.x - rad + 2 * rad * uni(rng), c0.y - rad + 2 * rad * uni(rng)};
                if (region_signed_distance(shape, c, res) > -(r + margin)) continue;
                ok = true;
                for (const auto& ob : sc.obstacles)
                    if (boundary_distance(ob, c, res) < r + margin ||
                        contains(ob, c))
                        ok = false;
            }
            if (!ok)
                throw ConfigError("random_pair: cannot place a bump inside the region");
            min_r = std::min(min_r, r);
            add_bump(f, c, r, uni(rng) > 0.5 ? 1.0 : -1.0);
        }
    };
    place(p.w0);
    place(p.w1);
    if (min_r < 2.5 * zm.grid.h)
        throw ConfigError("random_pair: grid too coarse to resolve the data bumps");
    restrict_to_region(zm, p.w0);
    restrict_to_region(zm, p.w1);
    const double n = pair_norm(p, zm);
    if (n <= 0) throw ConfigError("random_pair: generated data has zero energy");
    p *= 1.0 / n;
    return p;
}

}  // namespace wb
