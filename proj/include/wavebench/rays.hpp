#pragma once

#include <deque>
#include <optional>

#include "wavebench/scenario.hpp"

namespace wb {

/// Snell refraction with wave speeds: sin(theta_t) = (c_t / c_i) sin(theta_i).
/// Empty result is total internal reflection, a value and not an error.
inline std::optional<double> snell_refract(double theta_i, double c_i, double c_t) {
    if (c_i <= 0 || c_t <= 0) throw ConfigError("snell_refract: speeds must be > 0");
    const double s = (c_t / c_i) * std::sin(theta_i);
    if (s > 1.0) return std::nullopt;
    return std::asin(s);
}

enum class RayEventType { Launch, Reflect, Refract, Tir, Glance, Escape, Prune };

inline const char* to_string(RayEventType t) {
    switch (t) {
        case RayEventType::Launch: return "launch";
        case RayEventType::Reflect: return "reflect";
        case RayEventType::Refract: return "refract";
        case RayEventType::Tir: return "TIR";
        case RayEventType::Glance: return "glance";
        case RayEventType::Escape: return "escape";
        case RayEventType::Prune: return "prune";
    }
    return "?";
}

struct RayEvent {
    int ray_id = 0;
    int branch_id = 0;
    int event_index = 0;
    double t = 0.0;
    Vec2 x;
    RayEventType type = RayEventType::Launch;
    int zone = 0;
    double amplitude = 1.0;
};

struct Ray {
    Vec2 position;
    Vec2 direction;  // unit
    int zone = 1;    // medium index, innermost = 1
    double elapsed = 0.0;
    double amplitude = 1.0;
    int generation = 0;
};

enum class RayOutcome { Escaped, TrappedAtHorizon, Negligible };

struct BranchRecord {
    int ray_id = 0;
    int branch_id = 0;
    RayOutcome outcome = RayOutcome::Escaped;
    double final_time = 0.0;
    double amplitude = 0.0;
    Vec2 launch_pos;
    Vec2 launch_dir;
};

struct EscapeReport {
    std::vector<BranchRecord> branches;
    int n_rays = 0;
    double max_escape_time = 0.0;
    int trapped_count = 0;
    int negligible_count = 0;
    double surviving_weight = 0.0;  // amplitude at horizon / launch weight
    bool nontrapping_consistent = false;
    double chord_bound = 0.0;       // (2a + pi r_K)/c_min for one convex obstacle
    bool chord_bound_valid = false;
};

struct TraceOptions {
    double t_max = 20.0;
    int max_splits = 12;
    double amplitude_floor = 1e-3;
    bool acoustic_weights = false;  // false: equal halves at every split
    double tangency_deg = 0.5;
};

namespace detail {

struct PendingRay {
    Ray ray;
    int branch_id;
};

inline void require_constant_isotropic(const Scenario& sc) {
    for (const auto& m : sc.media) {
        if (!m.speed.constant())
            throw UnsupportedVariableMetric("ray tracing needs constant per-zone speeds");
        if (!m.g.is_identity())
            throw UnsupportedVariableMetric("ray tracing needs the identity metric");
    }
}

inline double medium_speed(const Scenario& sc, int medium) {
    if (medium > sc.zone_count()) return 1.0;
    return sc.media[std::size_t(medium - 1)].speed.c0;
}

/// Outer boundary shape of a medium (crossed when moving outward).
inline int outer_shape_of(const Scenario& sc, int medium) {
    // medium m sits between shape (N0-m+1) outside and shape (N0-m+2) inside
    const int n0 = sc.zone_count();
    const int idx = n0 - medium;  // 0-based into zones (outermost-first)
    return idx;                   // -1 for the exterior medium
}

}  // namespace detail

/// Trace one ray through the layered medium, branching at interfaces.
/// Events for every branch are appended to `events`; per-branch outcomes are
/// returned. Piecewise constant speeds only.
inline std::vector<BranchRecord> trace(const Ray& start, const Scenario& sc,
                                       const TraceOptions& opt,
                                       std::vector<RayEvent>* events = nullptr,
                                       int ray_id = 0) {
    detail::require_constant_isotropic(sc);
    if (sc.in_obstacle(start.position))
        throw ConfigError("trace: ray starts inside the obstacle");

    const double eps = 1e-9 * std::max(1.0, sc.a);
    const double tangency_cos = std::sin(opt.tangency_deg * pi / 180.0);
    std::vector<BranchRecord> records;
    std::deque<detail::PendingRay> queue;
    int next_branch = 0;

    Ray r0 = start;
    r0.direction = normalized(r0.direction);
    r0.zone = sc.medium_index(r0.position);
    queue.push_back({r0, next_branch++});

    auto emit = [&](const Ray& r, int branch, RayEventType type) {
        if (!events) return;
        RayEvent e;
        e.ray_id = ray_id;
        e.branch_id = branch;
        e.event_index = 0;  // filled on write-out
        e.t = r.elapsed;
        e.x = r.position;
        e.type = type;
        e.zone = r.zone;
        e.amplitude = r.amplitude;
        events->push_back(e);
    };

    emit(queue.front().ray, 0, RayEventType::Launch);

    while (!queue.empty()) {
        auto [ray, branch] = queue.front();
        queue.pop_front();

        bool done = false;
        while (!done) {
            const double c = detail::medium_speed(sc, ray.zone);
            // nearest event along the straight segment
            struct Hit {
                RayHit hit;
                enum { Obstacle, ZoneOuter, ZoneInner } kind;
                int shape_index;
            };
            std::optional<Hit> next;
            auto consider = [&](const std::optional<RayHit>& h, int kind, int sidx) {
                if (!h) return;
                if (!next || h->t < next->hit.t) {
                    next = Hit{*h, Hit::Obstacle, sidx};
                    next->kind = static_cast<decltype(next->kind)>(kind);
                }
            };
            for (std::size_t ob = 0; ob < sc.obstacles.size(); ++ob)
                consider(intersect_ray(sc.obstacles[ob], ray.position, ray.direction, eps),
                         0, int(ob));
            const int outer = detail::outer_shape_of(sc, ray.zone);
            if (outer >= 0)
                consider(intersect_ray(sc.zones[std::size_t(outer)], ray.position,
                                       ray.direction, eps),
                         1, outer);
            const int inner = outer + 1;
            if (inner >= 0 && inner < int(sc.zones.size()))
                consider(intersect_ray(sc.zones[std::size_t(inner)], ray.position,
                                       ray.direction, eps),
                         2, inner);

            const double t_remaining = (opt.t_max - ray.elapsed) * c;  // path budget
            if (!next || next->hit.t >= t_remaining) {
                // free run: either escapes B_a or meets the horizon
                const Vec2 p = ray.position;
                const Vec2 d = ray.direction;
                const double b = dot(p, d);
                const double cc = dot(p, p) - sc.a * sc.a;
                bool escapes = false;
                double path_to_exit = 0.0;
                if (cc >= 0 && b >= 0) {
                    escapes = true;  // already outside and receding
                } else {
                    const double disc = b * b - cc;
                    if (disc >= 0) {
                        const double exit = -b + std::sqrt(disc);
                        if (!next || exit < next->hit.t) {
                            path_to_exit = std::max(exit, 0.0);
                            escapes = path_to_exit < t_remaining;
                        }
                    }
                }
                if (escapes) {
                    ray.position = ray.position + ray.direction * path_to_exit;
                    ray.elapsed += path_to_exit / c;
                    emit(ray, branch, RayEventType::Escape);
                    records.push_back({ray_id, branch, RayOutcome::Escaped, ray.elapsed,
                                       ray.amplitude, start.position, start.direction});
                } else {
                    ray.position = ray.position + ray.direction * t_remaining;
                    ray.elapsed = opt.t_max;
                    records.push_back({ray_id, branch, RayOutcome::TrappedAtHorizon,
                                       ray.elapsed, ray.amplitude, start.position,
                                       start.direction});
                }
                done = true;
                continue;
            }

            // advance to the interface
            ray.position = next->hit.point;
            ray.elapsed += next->hit.t / c;
            const Vec2 n = next->hit.normal;  // outward of the hit shape
            const double cos_inc = -dot(ray.direction, n);  // >0: moving inward

            if (next->kind == Hit::Obstacle) {
                ray.direction =
                    normalized(ray.direction - n * (2.0 * dot(ray.direction, n)));
                emit(ray, branch, RayEventType::Reflect);
                ray.position = ray.position + ray.direction * eps;
                continue;
            }

            // zone interface: glancing, refraction + reflection split, or TIR
            if (std::abs(cos_inc) < tangency_cos) {
                // continue along the tangent, stay in the current medium
                Vec2 tang = ray.direction - n * dot(ray.direction, n);
                ray.direction = normalized(tang);
                emit(ray, branch, RayEventType::Glance);
                ray.position = ray.position + ray.direction * (4.0 * eps);
                continue;
            }

            const bool inward = cos_inc > 0.0;
            // crossing this shape changes the medium index by one
            const int target_zone = ray.zone + (inward ? -1 : +1);
            const double c_t = detail::medium_speed(sc, target_zone);
            const Vec2 nn = inward ? n : -n;  // against the travel direction
            const double ci = std::abs(dot(ray.direction, nn));
            const double eta = c_t / c;
            const double k = 1.0 - eta * eta * (1.0 - ci * ci);

            if (k < 0.0) {
                // total internal reflection: single child, full weight
                ray.direction = normalized(ray.direction - nn * (2.0 * dot(ray.direction, nn)));
                emit(ray, branch, RayEventType::Tir);
                ray.position = ray.position + ray.direction * eps;
                continue;
            }

            const Vec2 refr =
                normalized(ray.direction * eta + nn * (eta * ci - std::sqrt(k)));
            double w_refl = 0.5, w_refr = 0.5;
            if (opt.acoustic_weights) {
                const double ct_cos = std::sqrt(k);
                const double rr = (c_t * ci - c * ct_cos) / (c_t * ci + c * ct_cos);
                w_refl = rr * rr;
                w_refr = 1.0 - w_refl;
            }

            // reflected child
            Ray refl = ray;
            refl.direction =
                normalized(ray.direction - nn * (2.0 * dot(ray.direction, nn)));
            refl.amplitude = ray.amplitude * w_refl;
            refl.generation = ray.generation + 1;
            refl.position = refl.position + refl.direction * eps;

            // refracted continues as the current branch
            ray.direction = refr;
            ray.amplitude *= w_refr;
            ray.generation += 1;
            ray.zone = target_zone;
            emit(ray, branch, RayEventType::Refract);
            ray.position = ray.position + ray.direction * eps;

            if (refl.amplitude >= opt.amplitude_floor &&
                refl.generation <= opt.max_splits) {
                const int child = next_branch++;
                emit(refl, child, RayEventType::Reflect);
                queue.push_back({refl, child});
            } else {
                emit(refl, next_branch, RayEventType::Prune);
                records.push_back({ray_id, next_branch++, RayOutcome::Negligible,
                                   refl.elapsed, refl.amplitude, start.position,
                                   start.direction});
            }

            if (ray.amplitude < opt.amplitude_floor || ray.generation > opt.max_splits) {
                emit(ray, branch, RayEventType::Prune);
                records.push_back({ray_id, branch, RayOutcome::Negligible, ray.elapsed,
                                   ray.amplitude, start.position, start.direction});
                done = true;
            }
        }
    }
    return records;
}

/// Stratified survey of escape times. The launch set always contains the
/// canonical axis probes (origin, axis-aligned directions) so symmetric
/// trapped orbits are hit exactly.
inline EscapeReport escape_time_survey(const Scenario& sc, int n_rays,
                                       const TraceOptions& opt,
                                       std::vector<RayEvent>* events = nullptr) {
    detail::require_constant_isotropic(sc);
    EscapeReport rep;

    // chord bound applies to a lone convex obstacle with no zones
    if (sc.zones.empty() && sc.obstacles.size() == 1 &&
        !std::holds_alternative<Polygon>(sc.obstacles[0])) {
        double c_min = 1.0;
        rep.chord_bound = (2.0 * sc.a + pi * bounding_radius(sc.obstacles[0])) / c_min;
        rep.chord_bound_valid = true;
    }

    const int n_dir = std::max(4, int(std::floor(std::sqrt(double(n_rays)))));
    const int n_pos = std::max(1, n_rays / n_dir);
    std::vector<Ray> launches;
    // ring-stratified positions including the exact origin
    for (int p = 0; p < n_pos; ++p) {
        const double frac = n_pos > 1 ? double(p) / double(n_pos - 1) : 0.0;
        const double rad = 0.95 * sc.a * std::sqrt(frac);
        const double ang = 2.0 * pi * 0.61803398875 * p;  // golden spacing
        const Vec2 pos{rad * std::cos(ang), rad * std::sin(ang)};
        if (sc.in_obstacle(pos)) continue;
        for (int q = 0; q < n_dir; ++q) {
            const double th = 2.0 * pi * q / n_dir;  // includes the +x axis exactly
            launches.push_back(
                Ray{pos, {std::cos(th), std::sin(th)}, 1, 0.0, 1.0, 0});
        }
    }

    rep.n_rays = int(launches.size());
    double launch_weight = 0.0;
    for (std::size_t i = 0; i < launches.size(); ++i) {
        launch_weight += launches[i].amplitude;
        const auto recs = trace(launches[i], sc, opt, events, int(i));
        for (const auto& r : recs) {
            switch (r.outcome) {
                case RayOutcome::Escaped:
                    rep.max_escape_time = std::max(rep.max_escape_time, r.final_time);
                    break;
                case RayOutcome::TrappedAtHorizon:
                    ++rep.trapped_count;
                    if (r.amplitude > opt.amplitude_floor)
                        rep.surviving_weight += r.amplitude;
                    break;
                case RayOutcome::Negligible:
                    ++rep.negligible_count;
                    break;
            }
            rep.branches.push_back(r);
        }
    }
    rep.surviving_weight = launch_weight > 0 ? rep.surviving_weight / launch_weight : 0.0;
    rep.nontrapping_consistent = rep.surviving_weight <= 0.0;
    return rep;
}

}  // namespace wb
