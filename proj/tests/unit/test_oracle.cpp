#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "wavebench/oracle.hpp"

using namespace wb;
using wbtest::box_scenario;

namespace {

GridField bump_field(const ZoneMap& zm, unsigned seed, int n_bumps = 3) {
    std::mt19937_64 rng(seed);
    GridField f(zm.grid);
    const double sigma = 6.0 * zm.grid.h;
    // bumps stay clear of the walls: spectra must remain well resolved
    const double span = 0.5 - sigma - 2.0 * zm.grid.h;
    std::uniform_real_distribution<double> uni(-span, span);
    for (int b = 0; b < n_bumps; ++b) add_bump(f, {uni(rng), uni(rng)}, sigma, uni(rng));
    return f;
}

/// Random combination of modes below a frequency cut. Keeping the data inside
/// the dispersion budget of the quarter-CFL stepper is what makes a 1e-3
/// agreement at t = 1 meaningful.
GridField modal_field(const DenseOperator& op, const ZoneMap& zm, unsigned seed,
                      double omega_cut) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    GridField f(zm.grid);
    int used = 0;
    for (int m = 0; m < op.size(); ++m) {
        if (std::sqrt(std::max(op.eigenvalues[m], 0.0)) > omega_cut && used >= 3) break;
        const double a = uni(rng);
        for (int p = 0; p < op.size(); ++p)
            f.v[std::size_t(op.cell_of_unknown[std::size_t(p)])] +=
                a * op.eigenvectors(p, m) / std::sqrt(op.mass[p]);
        ++used;
    }
    return f;
}

}  // namespace

TEST_CASE("1-D analogue reproduces the three-point stencil") {
    Scenario sc;
    sc.name = "line";
    sc.a = 0.45;
    sc.box = {-0.5, -0.5, 0.5, 0.5};
    const double h = 0.1;
    ZoneMap zm = build_zone_map(sc, h, BcType::Dirichlet, BcType::Neumann,
                                BoxSpec{-0.5, 0.0, 0.5, h});
    REQUIRE(zm.grid.ny == 1);
    const DenseOperator op = assemble_discrete_operator(zm);
    const int p = op.unknown_of_cell[std::size_t(zm.grid.index(5, 0))];
    const int pl = op.unknown_of_cell[std::size_t(zm.grid.index(4, 0))];
    const int pr = op.unknown_of_cell[std::size_t(zm.grid.index(6, 0))];
    // sym = L / h^2 for unit coefficients
    CHECK(op.sym(p, p) == Catch::Approx(2.0 / (h * h)));
    CHECK(op.sym(p, pl) == Catch::Approx(-1.0 / (h * h)));
    CHECK(op.sym(p, pr) == Catch::Approx(-1.0 / (h * h)));
}

TEST_CASE("dense operator is symmetric in the weighted product") {
    const Scenario sc = wbtest::two_zone_scenario(0.1);
    const ZoneMap zm = build_zone_map(sc, 0.12);
    const DenseOperator op = assemble_discrete_operator(zm, 4000);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uni(-1, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        GridField u(zm.grid), w(zm.grid);
        for (std::size_t k = 0; k < u.size(); ++k)
            if (!(zm.flags[k] & kObstacle)) {
                u[k] = uni(rng);
                w[k] = uni(rng);
            }
        const double a = op.weighted_product(u, w);
        const double b = op.weighted_product(w, u);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("lowest Dirichlet eigenvalue of the unit box is near 2 pi^2") {
    const ZoneMap zm = build_zone_map(box_scenario(16), 1.0 / 16);
    const DenseOperator op = assemble_discrete_operator(zm);
    CHECK(op.eigenvalues[0] > 0.0);
    CHECK(op.eigenvalues[0] ==
          Catch::Approx(2.0 * pi * pi).epsilon(0.05));
}

TEST_CASE("oracle at t = 0 is the identity") {
    const ZoneMap zm = build_zone_map(box_scenario(12), 1.0 / 12);
    const DenseOperator op = assemble_discrete_operator(zm);
    const GridField f1 = bump_field(zm, 2);
    const GridField f2 = bump_field(zm, 3);
    const State s = propagate_oracle(op, f1, f2, 0.0);
    CHECK(wbtest::rel_l2(s.u, f1) < 1e-13);
    CHECK(wbtest::rel_l2(s.v, f2) < 1e-13);
}

TEST_CASE("a single eigenvector evolves by its cosine factor") {
    const ZoneMap zm = build_zone_map(box_scenario(10), 1.0 / 10);
    const DenseOperator op = assemble_discrete_operator(zm);
    const int mode = 4;
    const double lam = op.eigenvalues[mode];
    GridField f1(zm.grid);
    for (int p = 0; p < op.size(); ++p)
        f1.v[std::size_t(op.cell_of_unknown[std::size_t(p)])] =
            op.eigenvectors(p, mode) / std::sqrt(op.mass[p]);
    const double t = 0.63;
    const State s = propagate_oracle(op, f1, GridField(zm.grid), t);
    GridField want = f1;
    want *= std::cos(std::sqrt(lam) * t);
    CHECK(wbtest::rel_l2(s.u, want) < 1e-12);
}

TEST_CASE("oracle evolution conserves energy to rounding") {
    const ZoneMap zm = build_zone_map(box_scenario(12), 1.0 / 12);
    const DenseOperator op = assemble_discrete_operator(zm);
    const GridField f1 = bump_field(zm, 7);
    const GridField f2 = bump_field(zm, 8);
    State s0;
    s0.u = f1;
    s0.v = f2;
    const double e0 = energy(s0, Region::All, zm);
    for (double t : {0.3, 1.1, 2.7}) {
        const State st = propagate_oracle(op, f1, f2, t);
        CHECK(std::abs(energy(st, Region::All, zm) - e0) / e0 < 1e-12);
    }
}

TEST_CASE("oracle size guard") {
    const ZoneMap zm = build_zone_map(box_scenario(60), 1.0 / 60);
    CHECK_THROWS_AS(assemble_discrete_operator(zm), TooLargeForOracle);
}

TEST_CASE("stepper matches the oracle at quarter-CFL on a 24x24 grid") {
    const ZoneMap zm = build_zone_map(box_scenario(24), 1.0 / 24);
    const DenseOperator op = assemble_discrete_operator(zm);
    const GridField f1 = modal_field(op, zm, 21, 7.2);
    const GridField f2 = modal_field(op, zm, 22, 7.2);
    SolverConfig cfg;
    cfg.dt = 0.25 * cfl_limit(zm);
    State s0;
    s0.u = f1;
    s0.v = f2;
    const State num = evolve(s0, 0.0, 1.0, cfg, zm);
    const State ref = propagate_oracle(op, f1, f2, 1.0);
    CHECK(wbtest::rel_l2(num.u, ref.u) < 1e-3);
}

TEST_CASE("stepper matches the oracle across a transmission interface") {
    // small two-speed shell inside the oracle size budget
    const std::string text = R"(
[[zones]]
shape = disc
center = 0 0
radius = 0.25

[grid]
spacing = 0.03
box = -0.6 -0.6 0.6 0.6
a = 0.5

[coefficients]
c = 1.7
)";
    const Scenario sc = parse_scenario(text, "t");
    const ZoneMap zm = build_zone_map(sc, 1.0 / 40, BcType::Dirichlet, BcType::Dirichlet,
                                      BoxSpec{-0.6, -0.6, 0.6, 0.6});
    const DenseOperator op = assemble_discrete_operator(zm, 4000);
    const GridField f1 = modal_field(op, zm, 31, 9.0);
    SolverConfig cfg;
    cfg.dt = 0.25 * cfl_limit(zm);
    State s0(zm.grid);
    s0.u = f1;
    const State num = evolve(s0, 0.0, 1.0, cfg, zm);
    const State ref = propagate_oracle(op, f1, GridField(zm.grid), 1.0);
    CHECK(wbtest::rel_l2(num.u, ref.u) < 1e-3);
}
