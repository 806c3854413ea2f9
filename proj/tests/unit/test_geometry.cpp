#include <catch2/catch_amalgamated.hpp>

#include "wavebench/geometry.hpp"

using namespace wb;

TEST_CASE("disc containment and signed distance") {
    const Shape d = Disc{{1.0, 2.0}, 0.5};
    CHECK(contains(d, {1.2, 2.0}));
    CHECK_FALSE(contains(d, {1.6, 2.0}));
    CHECK(signed_distance(d, {1.0, 2.0}, 0.01) == Catch::Approx(-0.5));
    CHECK(signed_distance(d, {2.0, 2.0}, 0.01) == Catch::Approx(0.5));
}

TEST_CASE("polygon containment uses the crossing rule") {
    Polygon sq;
    sq.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(contains(sq, {0.5, 0.5}));
    CHECK_FALSE(contains(sq, {1.5, 0.5}));
    CHECK(std::abs(signed_distance(Shape{sq}, {0.5, 0.5}, 0.01) + 0.5) < 1e-9);
}

TEST_CASE("ellipse signed distance is polyline-accurate") {
    const Shape e = Ellipse{{0, 0}, 2.0, 1.0};
    // on the major axis the boundary is at x = 2
    CHECK(std::abs(signed_distance(e, {2.5, 0.0}, 0.005) - 0.5) < 2e-3);
    CHECK(signed_distance(e, {0.0, 0.0}, 0.005) < -0.9);
}

TEST_CASE("ray-disc intersection returns the near hit with outward normal") {
    const Shape d = Disc{{0, 0}, 1.0};
    const auto hit = intersect_ray(d, {-3, 0}, {1, 0});
    REQUIRE(hit.has_value());
    CHECK(hit->t == Catch::Approx(2.0));
    CHECK(hit->point.x == Catch::Approx(-1.0));
    CHECK(hit->normal.x == Catch::Approx(-1.0));
}

TEST_CASE("ray-polygon intersection") {
    Polygon sq;
    sq.vertices = {{1, -1}, {2, -1}, {2, 1}, {1, 1}};
    const auto hit = intersect_ray(Shape{sq}, {0, 0}, {1, 0});
    REQUIRE(hit.has_value());
    CHECK(hit->t == Catch::Approx(1.0));
    CHECK(hit->normal.x == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("ray misses") {
    const Shape d = Disc{{0, 0}, 1.0};
    CHECK_FALSE(intersect_ray(d, {-3, 2}, {1, 0}).has_value());
    // receding ray: hits behind the origin only
    CHECK_FALSE(intersect_ray(d, {-3, 0}, {-1, 0}).has_value());
}
