#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace wb;
using wbtest::disc_region_scenario;

namespace {

Workspace control_workspace(double h = 0.02, double horizon = 1.5) {
    return make_workspace(disc_region_scenario(h), horizon, h);
}

}  // namespace

TEST_CASE("extension of interior-supported data is exact zero-padding") {
    Workspace w = control_workspace();
    DataPair f(w.zm.grid);
    add_bump(f.w0, {0.05, -0.1}, 0.2, 1.0);  // support radius 0.2 well inside r=0.5
    add_bump(f.w1, {-0.1, 0.0}, 0.15, -0.7);
    const ExtendedPair e = extend_pair(f, w.zm);
    CHECK(e.support_certified);
    for (std::size_t k = 0; k < f.w0.size(); ++k) {
        CHECK(e.state.u[k] == f.w0[k]);
        CHECK(e.state.v[k] == f.w1[k]);
    }
}

TEST_CASE("restriction after extension is the exact identity") {
    Workspace w = control_workspace();
    for (unsigned seed = 1; seed <= 10; ++seed) {
        const DataPair f = random_pair(w.zm, seed);
        const ExtendedPair e = extend_pair(f, w.zm);
        const DataPair back = restricted(w.zm, e.state);
        for (std::size_t k = 0; k < f.w0.size(); ++k) {
            REQUIRE(back.w0[k] == f.w0[k]);
            REQUIRE(back.w1[k] == f.w1[k]);
        }
    }
}

TEST_CASE("extension support stays inside the collar") {
    Workspace w = control_workspace();
    GridField ones(w.zm.grid);
    for (std::size_t k = 0; k < ones.size(); ++k)
        if (w.zm.flags[k] & kOmegaStar) ones[k] = 1.0;
    DataPair f(w.zm.grid);
    f.w0 = ones;
    const ExtendedPair e = extend_pair(f, w.zm);
    CHECK(e.support_certified);
    for (std::size_t k = 0; k < e.state.u.size(); ++k)
        if (w.zm.sdist[k] >= w.zm.delta) CHECK(e.state.u[k] == 0.0);
}

TEST_CASE("extension boundedness constant is stable under refinement") {
    // intrinsic H1-type norm of the data, gradient-energy norm of the extension
    auto c_ext = [](double h) {
        Workspace w = control_workspace(h);
        DataPair f(w.zm.grid);
        int cells = 0;
        for (std::size_t k = 0; k < f.w0.size(); ++k)
            if (w.zm.flags[k] & kOmegaStar) {
                f.w0[k] = 1.0;
                ++cells;
            }
        const ExtendedPair e = extend_pair(f, w.zm);
        State es = e.state;
        es.v.fill(0.0);
        const double ext_grad = energy_parts(es, Region::All, w.zm).grad;
        const double data_l2 = cells * h * h;  // |Omega*| for w0 = 1
        return std::sqrt(ext_grad / data_l2);
    };
    const double c1 = c_ext(0.02);
    const double c2 = c_ext(0.01);
    CHECK(std::abs(c2 - c1) / c1 < 0.10);
}

TEST_CASE("collar thinner than three cells is rejected") {
    const Scenario sc = disc_region_scenario(0.08);  // delta/2 = 0.15 < 3h
    Workspace w = make_workspace(sc, 0.5, 0.08);
    DataPair f(w.zm.grid);
    CHECK_THROWS_AS(extend_pair(f, w.zm), DegenerateCollar);
}

TEST_CASE("cutoff multiplication fixes the plateau and kills the far field") {
    Workspace w = control_workspace();
    const GridField phi = synthesis_cutoff(w.zm);
    State s(w.zm.grid);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uni(-1, 1);
    for (std::size_t k = 0; k < s.u.size(); ++k) {
        s.u[k] = uni(rng);
        s.v[k] = uni(rng);
    }
    const State m = apply_cutoff(s, phi);
    for (std::size_t k = 0; k < s.u.size(); ++k) {
        if (w.zm.sdist[k] <= 0.5 * w.zm.delta) {
            CHECK(m.u[k] == s.u[k]);
            CHECK(m.v[k] == s.v[k]);
        }
        if (w.zm.sdist[k] >= 0.75 * w.zm.delta) {
            CHECK(m.u[k] == 0.0);
            CHECK(m.v[k] == 0.0);
        }
    }
}

TEST_CASE("cutoff energy growth stays under the measured Leibniz bound") {
    Workspace w = control_workspace();
    const GridField phi = synthesis_cutoff(w.zm);
    double max_grad = 0.0;
    for (int j = 1; j + 1 < w.zm.grid.ny; ++j)
        for (int i = 1; i + 1 < w.zm.grid.nx; ++i) {
            const double gx = (phi(i + 1, j) - phi(i - 1, j)) / (2 * w.zm.grid.h);
            const double gy = (phi(i, j + 1) - phi(i, j - 1)) / (2 * w.zm.grid.h);
            max_grad = std::max(max_grad, std::hypot(gx, gy));
        }
    const double diam = shape_diameter(w.sc.region->shape) + 2 * w.zm.delta;
    const double c_phi = max_grad * diam;
    CHECK(std::isfinite(c_phi));

    double worst = 0.0;
    for (unsigned seed = 0; seed < 5; ++seed) {
        State s(w.zm.grid);
        std::mt19937_64 rng(40 + seed);
        std::uniform_real_distribution<double> uni(0.1, 0.35);
        add_bump(s.u, {uni(rng) - 0.2, uni(rng) - 0.2}, uni(rng), 1.0);
        add_bump(s.v, {uni(rng) - 0.1, uni(rng) - 0.3}, uni(rng), -1.0);
        const double e = energy(s, Region::All, w.zm);
        const double em = energy(apply_cutoff(s, phi), Region::All, w.zm);
        worst = std::max(worst, em / e);
    }
    CHECK(worst <= 1.0 + c_phi);
}

TEST_CASE("return map is linear and annihilates zero") {
    Workspace w = control_workspace(0.02, 1.0);
    const GridField phi = synthesis_cutoff(w.zm);
    const double T = 0.8;
    const DataPair zero(w.zm.grid);
    const DataPair kz = apply_return_map(zero, T, w.cfg, w.zm, phi);
    CHECK(pair_norm(kz, w.zm) == 0.0);

    const DataPair a = random_pair(w.zm, 4);
    const DataPair b = random_pair(w.zm, 9);
    const DataPair ka = apply_return_map(a, T, w.cfg, w.zm, phi);
    const DataPair kb = apply_return_map(b, T, w.cfg, w.zm, phi);
    const DataPair kab = apply_return_map(2.0 * a + (-0.5) * b, T, w.cfg, w.zm, phi);
    const DataPair want = 2.0 * ka + (-0.5) * kb;
    CHECK(pair_norm(kab - want, w.zm) <= 1e-10 * pair_norm(want, w.zm));
}

TEST_CASE("geometric series arithmetic of the fixed-point solver") {
    Workspace w = control_workspace(0.05, 0.1);
    const DataPair f = random_pair(w.zm, 7);

    SECTION("zero data returns zero in one iteration") {
        auto [sol, rep] = solve_neumann(
            DataPair(w.zm.grid), [](const DataPair& p) { return p; }, w.zm, 1e-6, 10);
        CHECK(rep.iterations == 1);
        CHECK(pair_norm(sol, w.zm) == 0.0);
    }

    SECTION("half identity gives twice the data at ratio one half") {
        auto halve = [](const DataPair& p) { return 0.5 * p; };
        auto [sol, rep] = solve_neumann(f, halve, w.zm, 1e-6, 100);
        const DataPair err = sol - 2.0 * f;
        CHECK(pair_norm(err, w.zm) <= 2e-6 * pair_norm(f, w.zm));
        for (std::size_t i = 1; i < rep.residuals.size(); ++i)
            CHECK(rep.residuals[i] / rep.residuals[i - 1] ==
                  Catch::Approx(0.5).margin(1e-12));
        CHECK(rep.rho == Catch::Approx(0.5).margin(1e-12));
    }

    SECTION("iteration count follows the measured contraction factor") {
        auto shrink = [](const DataPair& p) { return 0.6 * p; };
        auto [sol, rep] = solve_neumann(f, shrink, w.zm, 1e-6, 100);
        const int predicted = int(std::ceil(std::log(1e-6) / std::log(rep.rho)));
        CHECK(std::abs(rep.iterations - predicted) <= 2);
        CHECK(std::abs(rep.iterations - 28) <= 2);
    }

    SECTION("growing maps are flagged, not iterated forever") {
        auto grow = [](const DataPair& p) { return 1.05 * p; };
        CHECK_THROWS_AS(solve_neumann(f, grow, w.zm, 1e-12, 1000), NotAContraction);
    }

    SECTION("iteration cap raises") {
        auto slow = [](const DataPair& p) { return 0.999 * p; };
        CHECK_THROWS_AS(solve_neumann(f, slow, w.zm, 1e-12, 5), MaxIterExceeded);
    }
}

TEST_CASE("power iteration recovers a known contraction factor") {
    Workspace w = control_workspace(0.05, 0.1);
    auto shrink = [](const DataPair& p) { return 0.37 * p; };
    const double rho = estimate_contraction(shrink, w.zm, 123, 8);
    CHECK(rho == Catch::Approx(0.37).margin(1e-12));
}
