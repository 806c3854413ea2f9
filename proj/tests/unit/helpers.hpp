#pragma once

#include <sstream>

#include "wavebench/cli.hpp"

namespace wbtest {

/// Plain unit box, no obstacle, no zones: [-1/2, 1/2]^2 with Dirichlet walls.
inline wb::Scenario box_scenario(int n) {
    wb::Scenario sc;
    sc.name = "box";
    sc.a = 0.45;
    sc.box = {-0.5, -0.5, 0.5, 0.5};
    sc.spacing = 1.0 / n;
    return sc;
}

/// Free space with a disc control region at the origin.
inline wb::Scenario disc_region_scenario(double h, double radius = 0.5,
                                         double delta = 0.3) {
    wb::Scenario sc;
    sc.name = "disc_region";
    sc.a = radius + delta + 0.1;
    const double half = sc.a + 0.15;
    sc.box = {-half, -half, half, half};
    sc.spacing = h;
    sc.region = wb::ControlRegionSpec{wb::Disc{{0, 0}, radius}, delta};
    sc.defaults.seed = 5;
    return sc;
}

/// Two concentric transmission shells around a disc obstacle.
inline wb::Scenario two_zone_scenario(double h) {
    std::ostringstream ss;
    ss << "[obstacle]\nshape = disc\ncenter = 0 0\nradius = 0.4\n"
       << "[[zones]]\nshape = disc\ncenter = 0 0\nradius = 1.6\n"
       << "[[zones]]\nshape = disc\ncenter = 0 0\nradius = 1.0\n"
       << "[control_region]\nshape = disc\ncenter = 0 1.3\nradius = 0.25\ndelta = 0.3\n"
       << "[grid]\nspacing = " << h << "\nbox = -2.2 -2.2 2.2 2.2\na = 1.9\n"
       << "[coefficients]\nc = 2 1.5\n";
    return wb::parse_scenario(ss.str(), "two_zone_test");
}

inline double rel_l2(const wb::GridField& a, const wb::GridField& b) {
    double num = 0, den = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        num += d * d;
        den += b[k] * b[k];
    }
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double rel_l2(const wb::State& a, const wb::State& b) {
    double num = 0, den = 0;
    for (std::size_t k = 0; k < a.u.size(); ++k) {
        const double du = a.u[k] - b.u[k];
        const double dv = a.v[k] - b.v[k];
        num += du * du + dv * dv;
        den += b.u[k] * b.u[k] + b.v[k] * b.v[k];
    }
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace wbtest
