#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace wb;

namespace {

/// History with analytic slab values, constant in time.
SolutionHistory analytic_history(const ZoneMap& zm, double (*field)(Vec2), int steps,
                                 double dt) {
    SolutionHistory h;
    h.slab_cells = boundary_slab_cells(zm, 4.0 * zm.grid.h);
    h.t0 = 0.0;
    h.dt = dt;
    h.steps = steps;
    for (int n = 0; n <= steps; ++n)
        for (int c : h.slab_cells) {
            const int i = c % zm.grid.nx;
            const int j = c / zm.grid.nx;
            h.slab_values.push_back(field(zm.grid.center(i, j)));
        }
    return h;
}

Scenario square_region_scenario(double h, bool with_metric) {
    Scenario sc;
    sc.name = "square";
    sc.a = 1.2;
    sc.box = {-1.4, -1.4, 1.4, 1.4};
    sc.spacing = h;
    Polygon sq;
    sq.vertices = {{-0.4, -0.4}, {0.4, -0.4}, {0.4, 0.4}, {-0.4, 0.4}};
    sc.region = ControlRegionSpec{sq, 0.3};
    if (with_metric) {
        sc.zones.push_back(Disc{{0, 0}, 0.9});
        Medium m;
        m.speed.c0 = m.speed.c1 = 1.0;
        m.g = Mat2{2.0, 0.0, 1.0};
        sc.media.push_back(m);
    }
    return sc;
}

}  // namespace

TEST_CASE("region geometry: disc gives one closed corner-free segment") {
    const Scenario sc = wbtest::disc_region_scenario(0.05);
    const RegionGeometry geom = build_region_geometry(sc, 0.05);
    REQUIRE(geom.segments.size() == 1);
    CHECK(geom.segments[0].closed);
    CHECK(geom.corners.empty());
    CHECK(geom.segments[0].length == Catch::Approx(2 * pi * 0.5).epsilon(1e-3));
    // outward normal is radial
    const Vec2 p = geom.segments[0].point_at(0.3);
    const Vec2 n = geom.segments[0].normal_at(0.3);
    CHECK(dot(normalized(p), n) == Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("region geometry: polygon edges carry corners and crossing tags") {
    const Scenario sc = load_scenario("fig2");
    const RegionGeometry geom = build_region_geometry(sc, sc.spacing);
    CHECK(geom.segments.size() == 4);
    CHECK(geom.corners.size() == 4);
    int crossing = 0;
    for (const auto& s : geom.segments) crossing += s.crossing ? 1 : 0;
    CHECK(crossing >= 2);  // the long edges span both interfaces
}

TEST_CASE("region geometry: obstacle inside the region becomes a shared wall") {
    const Scenario sc = load_scenario("fig3");
    const RegionGeometry geom = build_region_geometry(sc, sc.spacing);
    REQUIRE(geom.segments.size() == 2);
    CHECK_FALSE(geom.segments[0].obstacle_shared);
    CHECK(geom.segments[1].obstacle_shared);
}

TEST_CASE("trace of a linear field on a flat vertical segment") {
    const Scenario sc = square_region_scenario(0.02, false);
    const ZoneMap zm = build_zone_map(sc, sc.spacing);
    const RegionGeometry geom = build_region_geometry(sc, sc.spacing);
    const SolutionHistory hist =
        analytic_history(zm, [](Vec2 p) { return p.x; }, 2, 0.05);
    const ControlSignal sig = boundary_trace(hist, geom, zm, 0.0, 1.0);

    bool checked = false;
    for (std::size_t sidx = 0; sidx < sig.segments.size(); ++sidx) {
        const auto& tr = sig.segments[sidx];
        for (int i = 0; i < tr.n_s; ++i) {
            if (tr.censored[std::size_t(i)]) continue;
            const Vec2 nv = tr.normals[std::size_t(i)];
            if (std::abs(nv.x - 1.0) > 1e-9) continue;  // right edge only
            checked = true;
            CHECK(tr.dnu[std::size_t(i)] == Catch::Approx(1.0).margin(1e-10));
            CHECK(tr.g[std::size_t(i)] == Catch::Approx(1.0).margin(1e-10));
        }
    }
    CHECK(checked);
}

TEST_CASE("conormal trace picks up the metric tensor") {
    const Scenario sc = square_region_scenario(0.02, true);
    const ZoneMap zm = build_zone_map(sc, sc.spacing);
    const RegionGeometry geom = build_region_geometry(sc, sc.spacing);
    const SolutionHistory hist =
        analytic_history(zm, [](Vec2 p) { return p.x; }, 2, 0.05);
    const ControlSignal sig = boundary_trace(hist, geom, zm, 0.0, 1.0);
    for (const auto& tr : sig.segments)
        for (int i = 0; i < tr.n_s; ++i) {
            if (tr.censored[std::size_t(i)]) continue;
            const Vec2 nv = tr.normals[std::size_t(i)];
            if (std::abs(nv.x - 1.0) > 1e-9) continue;
            CHECK(tr.dnu[std::size_t(i)] == Catch::Approx(2.0).margin(1e-10));
        }
}

TEST_CASE("corner neighborhoods are censored to zero control") {
    const Scenario sc = square_region_scenario(0.02, false);
    const ZoneMap zm = build_zone_map(sc, sc.spacing);
    const RegionGeometry geom = build_region_geometry(sc, sc.spacing);
    const SolutionHistory hist =
        analytic_history(zm, [](Vec2 p) { return p.x; }, 1, 0.05);
    const ControlSignal sig = boundary_trace(hist, geom, zm, 1.0, 1.0);
    int censored = 0;
    for (const auto& tr : sig.segments)
        for (int i = 0; i < tr.n_s; ++i)
            if (tr.censored[std::size_t(i)]) {
                ++censored;
                CHECK(tr.g[std::size_t(i)] == 0.0);
                CHECK(geom.corner_distance(tr.points[std::size_t(i)]) <=
                      2.0 * zm.grid.h);
            }
    CHECK(censored >= 8);  // both ends of every edge
}

TEST_CASE("radial trace of x^2 + y^2 on a circular segment") {
    const Scenario sc = wbtest::disc_region_scenario(0.02);
    const ZoneMap zm = build_zone_map(sc, sc.spacing);
    const RegionGeometry geom = build_region_geometry(sc, sc.spacing);
    const SolutionHistory hist = analytic_history(
        zm, [](Vec2 p) { return p.x * p.x + p.y * p.y; }, 1, 0.05);
    const ControlSignal sig = boundary_trace(hist, geom, zm, 0.0, 1.0);
    const double r = 0.5;
    for (const auto& tr : sig.segments)
        for (int i = 0; i < tr.n_s; ++i)
            CHECK(tr.dnu[std::size_t(i)] == Catch::Approx(2.0 * r).margin(3 * 0.02));
}

TEST_CASE("trace extraction demands slab coverage") {
    const Scenario sc = wbtest::disc_region_scenario(0.05);
    const ZoneMap zm = build_zone_map(sc, sc.spacing);
    const RegionGeometry geom = build_region_geometry(sc, sc.spacing);
    SolutionHistory empty;
    CHECK_THROWS_AS(boundary_trace(empty, geom, zm, 1.0, 1.0),
                    TraceExtractionFailure);
}

TEST_CASE("replay rejects incompatible signals") {
    const Scenario sc = wbtest::disc_region_scenario(0.05);
    Workspace w = make_workspace(sc, 0.3, sc.spacing);
    const RegionGeometry geom = build_region_geometry(sc, sc.spacing);
    const DataPair f = random_pair(w.zm, 1);
    ControlSignal sig;
    sig.alpha = 1;
    sig.beta = 0;
    sig.t0 = 0;
    sig.dt = 0.05;
    sig.steps = 2;  // covers only t <= 0.1
    CHECK_THROWS_AS(replay_signal(f, sig, 0.3, w.cfg, w.zm, geom), IncompatibleSignal);
}

TEST_CASE("homogeneous Dirichlet replay of localized data decays locally") {
    // zero signal with nonzero data: the region keeps its energy at reflecting
    // walls, so the terminal level stays comparable to the free-decay ratio at
    // a sub-crossing horizon
    const Scenario sc = wbtest::disc_region_scenario(0.02);
    Workspace w = make_workspace(sc, 0.6, sc.spacing);
    const RegionGeometry geom = build_region_geometry(sc, sc.spacing);
    DataPair f(w.zm.grid);
    add_bump(f.w0, {0.0, 0.0}, 0.18, 1.0);
    const double T = 0.35;

    SolutionHistory hist;
    hist.slab_cells = boundary_slab_cells(w.zm, 4 * w.zm.grid.h);
    (void)evolve(as_state(f), 0.0, T, w.cfg, w.zm, &hist);
    ControlSignal zero_sig = boundary_trace(hist, geom, w.zm, 1.0, 1.0);
    for (auto& seg : zero_sig.segments)
        std::fill(seg.g.begin(), seg.g.end(), 0.0);

    const ReplayReport rep = replay_signal(f, zero_sig, T, w.cfg, w.zm, geom);
    const DecaySeries free_run =
        measure_decay(f, w.cfg, w.zm, {T}, Region::OmegaStar);
    const double predicted = free_run.ratio(0, RatioConvention::Energy);
    CHECK(rep.terminal_rel_energy >= 0.1 * predicted);
    CHECK(rep.terminal_rel_energy <= 10.0 * predicted);
}
