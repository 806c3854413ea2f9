#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "wavebench/rays.hpp"

using namespace wb;

TEST_CASE("normal incidence passes straight through") {
    const auto t = snell_refract(0.0, 1.0, 2.0);
    REQUIRE(t.has_value());
    CHECK(*t == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("no speed contrast leaves the angle unchanged") {
    const auto t = snell_refract(pi / 6, 1.3, 1.3);
    REQUIRE(t.has_value());
    CHECK(*t == Catch::Approx(pi / 6));
}

TEST_CASE("steep incidence into a faster medium reflects totally") {
    // sin 60 deg * 1.5 = 1.299 > 1
    CHECK_FALSE(snell_refract(pi / 3, 1.0, 1.5).has_value());
}

TEST_CASE("tangential slowness is invariant across refraction") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(0.0, pi / 2 - 0.05);
    std::uniform_real_distribution<double> spd(0.5, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double ti = ang(rng);
        const double ci = spd(rng);
        const double ct = spd(rng);
        const auto tt = snell_refract(ti, ci, ct);
        if (!tt) continue;
        CHECK(std::abs(std::sin(*tt) / ct - std::sin(ti) / ci) < 1e-12);
    }
}

TEST_CASE("free-space ray escapes the measurement ball at t = a") {
    Scenario sc;
    sc.name = "free";
    sc.a = 2.0;
    sc.box = {-2.5, -2.5, 2.5, 2.5};
    sc.spacing = 0.1;
    TraceOptions opt;
    opt.t_max = 10.0;
    const auto recs = trace(Ray{{0, 0}, {0.6, 0.8}, 1, 0, 1, 0}, sc, opt);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].outcome == RayOutcome::Escaped);
    CHECK(recs[0].final_time == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("axis ray between two discs bounces forever") {
    const Scenario sc = load_scenario("two_disc");
    TraceOptions opt;
    opt.t_max = 20.0;
    const auto recs = trace(Ray{{0, 0}, {1, 0}, 1, 0, 1, 0}, sc, opt);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].outcome == RayOutcome::TrappedAtHorizon);
}

TEST_CASE("splitless reflection retraces itself when reversed") {
    const Scenario sc = load_scenario("convex_obstacle");
    TraceOptions opt;
    opt.t_max = 20.0;
    std::vector<RayEvent> fwd_events;
    const Ray start{{-2.0, 0.21}, {1, 0}, 1, 0, 1, 0};
    const auto recs = trace(start, sc, opt, &fwd_events);
    REQUIRE(recs.size() == 1);
    REQUIRE(recs[0].outcome == RayOutcome::Escaped);
    REQUIRE(fwd_events.size() >= 3);  // launch, reflect, escape
    const RayEvent& reflect = fwd_events[1];
    REQUIRE(reflect.type == RayEventType::Reflect);

    // launch backward from the escape point
    const RayEvent& escape = fwd_events.back();
    Vec2 back_dir;
    {
        // direction of the last leg
        back_dir = normalized(reflect.x - escape.x);
    }
    std::vector<RayEvent> rev_events;
    (void)trace(Ray{escape.x, back_dir, 1, 0, 1, 0}, sc, opt, &rev_events);
    REQUIRE(rev_events.size() >= 2);
    CHECK(rev_events[1].type == RayEventType::Reflect);
    CHECK(norm(rev_events[1].x - reflect.x) < 1e-6);
}

TEST_CASE("amplitude weights are conserved across every split") {
    const Scenario sc = load_scenario("fig4a");
    TraceOptions opt;
    opt.t_max = 12.0;
    for (bool acoustic : {false, true}) {
        opt.acoustic_weights = acoustic;
        for (double angle : {0.1, 0.7, 1.2}) {
            const auto recs = trace(
                Ray{{0.8, 0.0}, {std::cos(angle), std::sin(angle)}, 1, 0, 1, 0}, sc,
                opt);
            double total = 0.0;
            for (const auto& r : recs) total += r.amplitude;
            CHECK(total == Catch::Approx(1.0).margin(1e-12));
        }
    }
}

TEST_CASE("convex obstacle survey escapes within its own chord bound") {
    const Scenario sc = load_scenario("convex_obstacle");
    TraceOptions opt;
    opt.t_max = 30.0;
    const EscapeReport rep = escape_time_survey(sc, 2000, opt);
    REQUIRE(rep.chord_bound_valid);
    CHECK(rep.trapped_count == 0);
    CHECK(rep.nontrapping_consistent);
    CHECK(rep.max_escape_time <= rep.chord_bound);
}

TEST_CASE("two-disc survey flags the trapped axis ray") {
    const Scenario sc = load_scenario("two_disc");
    TraceOptions opt;
    opt.t_max = 25.0;
    const EscapeReport rep = escape_time_survey(sc, 900, opt);
    CHECK(rep.trapped_count >= 1);
    CHECK_FALSE(rep.nontrapping_consistent);
}

TEST_CASE("layered survey: surviving interior weight is negligible") {
    const Scenario sc = load_scenario("fig4a");
    TraceOptions opt;
    opt.t_max = 40.0;
    opt.max_splits = 14;
    const EscapeReport rep = escape_time_survey(sc, 400, opt);
    CHECK(rep.surviving_weight < 1e-3);
}

TEST_CASE("variable metrics are refused") {
    const Scenario sc = load_scenario("radial_speed");
    TraceOptions opt;
    CHECK_THROWS_AS(trace(Ray{{1.2, 0}, {1, 0}, 1, 0, 1, 0}, sc, opt),
                    UnsupportedVariableMetric);
}
