#pragma once

#include <functional>

#include "wavebench/zone_map.hpp"

namespace wb {

/// A point of the energy phase space: displacement and velocity fields.
struct State {
    GridField u;
    GridField v;
    double time_stamp = 0.0;

    State() = default;
    explicit State(const Grid& g) : u(g), v(g) {}
};

enum class Truncation { ExactBox, SpongeLayer };

struct SolverConfig {
    double dt = 0.0;          // 0 = derive from the CFL bound
    double cfl_safety = 0.9;  // fraction of the strict 2-D stability limit
    Truncation truncation = Truncation::ExactBox;
    double sponge_width = 0.0;
    double sponge_strength = 0.0;
    int snapshot_every = 0;   // steps between stored snapshots, 0 = none
};

/// Strict stability limit of the explicit scheme on this map.
inline double cfl_limit(const ZoneMap& zm) {
    return zm.grid.h / (std::sqrt(2.0) * zm.max_speed_cells);
}

inline double auto_dt(const ZoneMap& zm, const SolverConfig& cfg) {
    if (cfg.dt > 0.0) {
        if (cfg.dt > cfl_limit(zm) * (1.0 + 1e-12))
            throw CflViolation("dt " + std::to_string(cfg.dt) + " exceeds the limit " +
                               std::to_string(cfl_limit(zm)));
        return cfg.dt;
    }
    return cfg.cfl_safety * cfl_limit(zm);
}

/// Stiffness application: out = L u, where <L u, u> equals the (unscaled)
/// gradient energy. Non-fluid neighbors read as zero; the face coefficients
/// already encode the Dirichlet/Neumann choice.
inline void apply_stiffness(const ZoneMap& zm, const GridField& u, GridField& out) {
    const Grid& g = zm.grid;
    const int nx = g.nx, ny = g.ny;
    auto uat = [&](int i, int j) -> double {
        if (i < 0 || i >= nx || j < 0 || j >= ny) return 0.0;
        const std::size_t k = std::size_t(j * nx + i);
        return (zm.flags[k] & kObstacle) ? 0.0 : u.v[k];
    };
    bool any_cross = false;
    for (double c : zm.gxy)
        if (c != 0.0) { any_cross = true; break; }

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = std::size_t(j * nx + i);
            if (zm.flags[k] & kObstacle) {
                out.v[k] = 0.0;
                continue;
            }
            const double uc = u.v[k];
            double acc = zm.fx[std::size_t(zm.fx_index(i + 1, j))] * (uc - uat(i + 1, j)) +
                         zm.fx[std::size_t(zm.fx_index(i, j))] * (uc - uat(i - 1, j)) +
                         zm.fy[std::size_t(zm.fy_index(i, j + 1))] * (uc - uat(i, j + 1)) +
                         zm.fy[std::size_t(zm.fy_index(i, j))] * (uc - uat(i, j - 1));
            out.v[k] = acc;
        }
    }
    if (any_cross) {
        auto dx = [&](int i, int j) { return 0.5 * (uat(i + 1, j) - uat(i - 1, j)); };
        auto dy = [&](int i, int j) { return 0.5 * (uat(i, j + 1) - uat(i, j - 1)); };
        auto gxy_at = [&](int i, int j) -> double {
            if (i < 0 || i >= nx || j < 0 || j >= ny) return 0.0;
            const std::size_t k = std::size_t(j * nx + i);
            return (zm.flags[k] & kObstacle) ? 0.0 : zm.gxy[k];
        };
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const std::size_t k = std::size_t(j * nx + i);
                if (zm.flags[k] & kObstacle) continue;
                out.v[k] += 0.5 * (gxy_at(i - 1, j) * dy(i - 1, j) -
                                   gxy_at(i + 1, j) * dy(i + 1, j) +
                                   gxy_at(i, j - 1) * dx(i, j - 1) -
                                   gxy_at(i, j + 1) * dx(i, j + 1));
            }
    }
}

/// P u = L u / (w h^2); the semi-discrete system is u'' = -P u.
inline void apply_operator(const ZoneMap& zm, const GridField& u, GridField& out) {
    apply_stiffness(zm, u, out);
    const double inv_h2 = 1.0 / (zm.grid.h * zm.grid.h);
    for (std::size_t k = 0; k < out.v.size(); ++k)
        out.v[k] *= inv_h2 / zm.weight[k];
}

enum class Region { All, BallA, OmegaStar, Collar };

inline bool in_region(const ZoneMap& zm, std::size_t k, Region r) {
    const std::uint8_t f = zm.flags[k];
    if (f & kObstacle) return false;
    switch (r) {
        case Region::All: return true;
        case Region::BallA: return f & kBallA;
        case Region::OmegaStar: return f & kOmegaStar;
        case Region::Collar: return f & kCollar;
    }
    return false;
}

struct EnergyParts {
    double grad = 0.0;
    double kin = 0.0;
    double total() const { return grad + kin; }
};

/// Gradient + kinetic energy restricted to a region:
///   sum_faces g_face |du|^2 + sum_cells w |v|^2, scaled by cell area.
inline EnergyParts energy_parts(const State& s, Region region, const ZoneMap& zm) {
    const Grid& g = zm.grid;
    const int nx = g.nx, ny = g.ny;
    auto uat = [&](int i, int j) -> double {
        if (i < 0 || i >= nx || j < 0 || j >= ny) return 0.0;
        const std::size_t k = std::size_t(j * nx + i);
        return (zm.flags[k] & kObstacle) ? 0.0 : s.u.v[k];
    };
    auto in_r = [&](int i, int j) {
        if (i < 0 || i >= nx || j < 0 || j >= ny) return false;
        return in_region(zm, std::size_t(j * nx + i), region);
    };
    EnergyParts e;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const double f = zm.fx[std::size_t(zm.fx_index(i, j))];
            if (f == 0.0) continue;
            if (!in_r(i - 1, j) && !in_r(i, j)) continue;
            const double du = uat(i, j) - uat(i - 1, j);
            e.grad += f * du * du;
        }
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double f = zm.fy[std::size_t(zm.fy_index(i, j))];
            if (f == 0.0) continue;
            if (!in_r(i, j - 1) && !in_r(i, j)) continue;
            const double du = uat(i, j) - uat(i, j - 1);
            e.grad += f * du * du;
        }
    const double h2 = g.h * g.h;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = std::size_t(j * nx + i);
            if (!in_region(zm, k, region)) continue;
            e.kin += zm.weight[k] * s.v.v[k] * s.v.v[k] * h2;
            if (zm.gxy[k] != 0.0) {
                const double dx = 0.5 * (uat(i + 1, j) - uat(i - 1, j));
                const double dy = 0.5 * (uat(i, j + 1) - uat(i, j - 1));
                e.grad += 2.0 * zm.gxy[k] * dx * dy;
            }
        }
    return e;
}

inline double energy(const State& s, Region region, const ZoneMap& zm) {
    return energy_parts(s, region, zm).total();
}

/// The quadratic form the stepper preserves exactly in exact arithmetic:
/// E - (dt^2/4) ||P u||_w^2.
inline double conserved_energy(const State& s, const ZoneMap& zm, double dt) {
    const double e = energy(s, Region::All, zm);
    GridField pu(zm.grid);
    apply_operator(zm, s.u, pu);
    double corr = 0.0;
    const double h2 = zm.grid.h * zm.grid.h;
    for (std::size_t k = 0; k < pu.size(); ++k)
        corr += zm.weight[k] * pu.v[k] * pu.v[k] * h2;
    return e - 0.25 * dt * dt * corr;
}

/// Per-step record of displacement values on a fixed set of cells, plus
/// optional full snapshots. Covers every step of a run including t0.
struct SolutionHistory {
    std::vector<int> slab_cells;
    std::vector<double> slab_values;  // (steps+1) x slab_cells.size(), row-major
    double t0 = 0.0;
    double dt = 0.0;
    int steps = 0;
    std::vector<std::pair<double, GridField>> snapshots;
    bool contaminated = false;

    double slab_at(int step, std::size_t cell_pos) const {
        return slab_values[std::size_t(step) * slab_cells.size() + cell_pos];
    }
};

/// Cells within `width` of the control boundary (both sides), for trace slabs.
inline std::vector<int> boundary_slab_cells(const ZoneMap& zm, double width) {
    std::vector<int> cells;
    for (int k = 0; k < zm.grid.size(); ++k) {
        const std::size_t kk = std::size_t(k);
        if (zm.flags[kk] & kObstacle) continue;
        if (std::abs(zm.sdist[kk]) <= width) cells.push_back(k);
    }
    return cells;
}

inline double support_radius(const State& s, const ZoneMap& zm) {
    const double cutoff =
        1e-12 * std::max(s.u.max_abs(), s.v.max_abs());
    double r = 0.0;
    for (int j = 0; j < zm.grid.ny; ++j)
        for (int i = 0; i < zm.grid.nx; ++i) {
            const std::size_t k = std::size_t(zm.grid.index(i, j));
            if (std::abs(s.u.v[k]) > cutoff || std::abs(s.v.v[k]) > cutoff)
                r = std::max(r, norm(zm.grid.center(i, j)));
        }
    return r;
}

namespace detail {

inline void record_slab(const SolutionHistory& h, std::vector<double>& out,
                        const GridField& u) {
    for (int c : h.slab_cells) out.push_back(u.v[std::size_t(c)]);
}

}  // namespace detail

/// Advance the state from t0 to t1 with the reversible leapfrog scheme.
/// If `hist` is given (with slab_cells preset), displacement slabs are recorded
/// at every step boundary.
inline State evolve(const State& s0, double t0, double t1, const SolverConfig& cfg,
                    const ZoneMap& zm, SolutionHistory* hist = nullptr) {
    if (!(t1 > t0)) throw ConfigError("evolve: need t1 > t0");
    if (int(s0.u.size()) != zm.grid.size() || int(s0.v.size()) != zm.grid.size())
        throw ConfigError("evolve: state fields do not match the grid");
    const double dt_target = auto_dt(zm, cfg);
    const int steps = std::max(1, int(std::ceil((t1 - t0) / dt_target - 1e-9)));
    const double dt = (t1 - t0) / steps;
    if (dt > cfl_limit(zm) * (1.0 + 1e-12))
        throw CflViolation("resolved dt exceeds the stability limit");

    State s = s0;
    s.time_stamp = t0;
    GridField acc(zm.grid);

    if (hist) {
        hist->t0 = t0;
        hist->dt = dt;
        hist->steps = steps;
        hist->slab_values.clear();
        hist->slab_values.reserve(std::size_t(steps + 1) * hist->slab_cells.size());
        detail::record_slab(*hist, hist->slab_values, s.u);
        hist->contaminated =
            (t1 - t0) > zm.clean_horizon(support_radius(s0, zm)) &&
            cfg.truncation == Truncation::ExactBox;
        if (cfg.snapshot_every > 0) hist->snapshots.push_back({t0, s.u});
    }

    // sponge damping profile (exploration only; never used for control runs)
    std::vector<double> sigma;
    if (cfg.truncation == Truncation::SpongeLayer && cfg.sponge_width > 0) {
        sigma.assign(std::size_t(zm.grid.size()), 0.0);
        const Grid& g = zm.grid;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const Vec2 p = g.center(i, j);
                const double dwall =
                    std::min(std::min(p.x - g.x0, g.x_max() - p.x),
                             std::min(p.y - g.y0, g.y_max() - p.y));
                if (dwall < cfg.sponge_width)
                    sigma[std::size_t(g.index(i, j))] =
                        cfg.sponge_strength *
                        smoothstep5(1.0 - dwall / cfg.sponge_width);
            }
    }

    apply_operator(zm, s.u, acc);
    for (int n = 0; n < steps; ++n) {
        const double half = 0.5 * dt;
        for (std::size_t k = 0; k < s.v.v.size(); ++k) s.v.v[k] -= half * acc.v[k];
        for (std::size_t k = 0; k < s.u.v.size(); ++k) s.u.v[k] += dt * s.v.v[k];
        apply_operator(zm, s.u, acc);
        for (std::size_t k = 0; k < s.v.v.size(); ++k) s.v.v[k] -= half * acc.v[k];
        if (!sigma.empty())
            for (std::size_t k = 0; k < s.v.v.size(); ++k)
                s.v.v[k] *= 1.0 / (1.0 + dt * sigma[k]);
        s.time_stamp = t0 + (n + 1) * dt;
        if (hist) {
            detail::record_slab(*hist, hist->slab_values, s.u);
            if (cfg.snapshot_every > 0 && ((n + 1) % cfg.snapshot_every == 0))
                hist->snapshots.push_back({s.time_stamp, s.u});
        }
    }
    s.time_stamp = t1;
    return s;
}

/// Solve backward: returns the state at time 0 whose forward evolution reaches
/// `terminal` at time T (velocity negation + forward run + negation).
inline State evolve_backward(const State& terminal, double T, const SolverConfig& cfg,
                             const ZoneMap& zm, SolutionHistory* hist = nullptr) {
    State r = terminal;
    for (auto& x : r.v.v) x = -x;
    State b = evolve(r, 0.0, T, cfg, zm, hist);
    for (auto& x : b.v.v) x = -x;
    b.time_stamp = 0.0;
    return b;
}

}  // namespace wb
