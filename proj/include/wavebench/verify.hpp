#pragma once

#include "wavebench/data.hpp"
#include "wavebench/trace.hpp"

namespace wb {

/// Re-solves the wave equation restricted to the control region, driving the
/// boundary with a recorded Robin signal through ghost cells. Shares only the
/// stencil conventions with the full-domain propagator; the synthesis operator
/// pipeline is never touched here.
struct ReplayReport {
    double initial_energy = 0.0;
    double terminal_energy = 0.0;
    double terminal_rel_energy = 0.0;
    int steps = 0;
    double dt = 0.0;
};

namespace detail {

struct GhostFace {
    int cell_in = 0;
    int axis = 0;     // 0 = x, 1 = y
    int sgn = 1;      // outside neighbor at +axis (+1) or -axis (-1)
    double f = 0.0;   // face coefficient
    double q = 0.0;   // share of the conormal flux carried by this face axis
    int seg = -1;     // index into signal.segments
    double s = 0.0;   // arclength of the face-center projection
    bool obstacle = false;
};

}  // namespace detail

inline ReplayReport replay_signal(const DataPair& data, const ControlSignal& sig,
                                  double T, const SolverConfig& cfg, const ZoneMap& zm,
                                  const RegionGeometry& geom) {
    if (sig.alpha == 0.0 && sig.beta == 0.0)
        throw IncompatibleSignal("signal has alpha = beta = 0");
    if (sig.steps <= 0 || sig.dt <= 0.0)
        throw IncompatibleSignal("signal carries no time lattice");
    if (sig.t0 > 1e-12 || sig.t0 + sig.steps * sig.dt < T - 1e-9)
        throw IncompatibleSignal("signal does not cover [0, T]");

    const Grid& g = zm.grid;
    const double h = g.h;
    auto in_mask = [&](int i, int j) {
        if (!g.in_bounds(i, j)) return false;
        return (zm.flags[std::size_t(g.index(i, j))] & kOmegaStar) != 0;
    };

    // enumerate mask-boundary faces and bind them to signal samples
    std::vector<detail::GhostFace> faces;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!in_mask(i, j)) continue;
            const std::size_t k = std::size_t(g.index(i, j));
            const int di[4] = {1, -1, 0, 0};
            const int dj[4] = {0, 0, 1, -1};
            for (int q = 0; q < 4; ++q) {
                const int ii = i + di[q], jj = j + dj[q];
                if (in_mask(ii, jj)) continue;
                detail::GhostFace face;
                face.cell_in = g.index(i, j);
                face.axis = (q < 2) ? 0 : 1;
                face.sgn = (di[q] + dj[q] > 0) ? 1 : -1;
                face.f = (face.axis == 0)
                             ? zm.fx[std::size_t(zm.fx_index(std::max(i, ii) , j))]
                             : zm.fy[std::size_t(zm.fy_index(i, std::max(j, jj)))];
                const bool nbr_obstacle =
                    !g.in_bounds(ii, jj) ||
                    (zm.flags[std::size_t(g.index(ii, jj))] & kObstacle);
                if (nbr_obstacle) {
                    face.obstacle = true;  // ghost is zero; f already encodes the BC
                    faces.push_back(face);
                    continue;
                }
                if (face.f <= 0.0) continue;
                if (zm.gxy[k] != 0.0)
                    throw IncompatibleSignal(
                        "cross metric terms at the control boundary are not supported");
                const Vec2 pc = g.center(i, j);
                const Vec2 pface = face.axis == 0
                                       ? Vec2{pc.x + face.sgn * 0.5 * h, pc.y}
                                       : Vec2{pc.x, pc.y + face.sgn * 0.5 * h};
                // nearest controlled segment
                double best = std::numeric_limits<double>::max();
                for (std::size_t sidx = 0; sidx < sig.segments.size(); ++sidx) {
                    // match trace segments to geometry by id
                    const auto& tr = sig.segments[sidx];
                    const BoundarySegment* bs = nullptr;
                    for (const auto& b : geom.segments)
                        if (b.id == tr.segment_id) bs = &b;
                    if (!bs) throw IncompatibleSignal("signal segment id not in geometry");
                    double dist = 0.0;
                    const double s = bs->project(pface, &dist);
                    if (dist < best) {
                        best = dist;
                        face.seg = int(sidx);
                        face.s = s;
                        const Vec2 nu = bs->normal_at(s);
                        // flux model g grad(u) ~ nu * dnu / (nu^T g nu): the face
                        // carries the axis share of the conormal flux
                        const double nd = (face.axis == 0 ? nu.x : nu.y) * face.sgn;
                        const double gdd = (face.axis == 0) ? zm.gxx[k] : zm.gyy[k];
                        const double ngn = zm.gxx[k] * nu.x * nu.x +
                                           2 * zm.gxy[k] * nu.x * nu.y +
                                           zm.gyy[k] * nu.y * nu.y;
                        face.q = gdd * nd / ngn;
                    }
                }
                if (face.seg < 0)
                    throw IncompatibleSignal("no controlled segment near a boundary face");
                faces.push_back(face);
            }
        }
    }

    // time lattice: reuse the signal lattice when it is stable, refine otherwise
    double dt = sig.dt;
    if (dt > cfl_limit(zm)) dt = auto_dt(zm, cfg);
    const int steps = std::max(1, int(std::llround(T / dt)));
    dt = T / steps;

    GridField u = data.w0;
    GridField v = data.w1;
    const State init = as_state(data);
    const double e0 = energy(init, Region::OmegaStar, zm);

    GridField acc(g);
    auto uat = [&](int i, int j) -> double {
        if (!in_mask(i, j)) return 0.0;
        return u.v[std::size_t(g.index(i, j))];
    };
    auto apply_p = [&](double t, GridField& out) {
        // base stencil over mask cells with zero outside
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = std::size_t(g.index(i, j));
                if (!in_mask(i, j)) {
                    out.v[k] = 0.0;
                    continue;
                }
                const double uc = u.v[k];
                out.v[k] = zm.fx[std::size_t(zm.fx_index(i + 1, j))] * (uc - uat(i + 1, j)) +
                           zm.fx[std::size_t(zm.fx_index(i, j))] * (uc - uat(i - 1, j)) +
                           zm.fy[std::size_t(zm.fy_index(i, j + 1))] * (uc - uat(i, j + 1)) +
                           zm.fy[std::size_t(zm.fy_index(i, j))] * (uc - uat(i, j - 1));
            }
        // ghost corrections on boundary faces
        for (const auto& face : faces) {
            if (face.obstacle) continue;  // ghost 0: base pass is already right
            const std::size_t k = std::size_t(face.cell_in);
            const double ui = u.v[k];
            const auto& tr = sig.segments[std::size_t(face.seg)];
            const double gval = signal_value(sig, tr, face.s, t);
            const double a = sig.alpha, b = sig.beta;
            double ughost;
            if (b != 0.0) {
                // impose the face share of the conormal flux; the inner value
                // stands in for the surface trace in the Robin relation
                if (!(face.f > 0.0))
                    throw RobinSingular("vanishing face coefficient at a Robin face");
                const double dnu = (gval - a * ui) / b;
                ughost = ui + h * face.q * dnu / face.f;
            } else {
                // pure Dirichlet data: reflect about the prescribed face value
                ughost = 2.0 * gval / a - ui;
            }
            out.v[k] -= face.f * ughost;  // base pass assumed a zero neighbor
        }
        const double inv = 1.0 / (h * h);
        for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] *= inv / zm.weight[k];
    };

    apply_p(0.0, acc);
    for (int n = 0; n < steps; ++n) {
        const double half = 0.5 * dt;
        for (std::size_t k = 0; k < v.v.size(); ++k) v.v[k] -= half * acc.v[k];
        for (std::size_t k = 0; k < u.v.size(); ++k) u.v[k] += dt * v.v[k];
        apply_p((n + 1) * dt, acc);
        for (std::size_t k = 0; k < v.v.size(); ++k) v.v[k] -= half * acc.v[k];
    }

    State fin;
    fin.u = u;
    fin.v = v;
    fin.time_stamp = T;
    ReplayReport rep;
    rep.initial_energy = e0;
    rep.terminal_energy = energy(fin, Region::OmegaStar, zm);
    rep.terminal_rel_energy = e0 > 0 ? rep.terminal_energy / e0 : 0.0;
    rep.steps = steps;
    rep.dt = dt;
    return rep;
}

}  // namespace wb
