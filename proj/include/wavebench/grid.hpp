#pragma once

#include <cassert>
#include <vector>

#include "wavebench/common.hpp"

namespace wb {

/// Uniform cell-centered Cartesian grid over [x0, x0+nx*h] x [y0, y0+ny*h].
struct Grid {
    double x0 = 0.0;
    double y0 = 0.0;
    double h = 1.0;
    int nx = 0;
    int ny = 0;

    int size() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    bool in_bounds(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    Vec2 center(int i, int j) const {
        return {x0 + (i + 0.5) * h, y0 + (j + 0.5) * h};
    }
    double x_max() const { return x0 + nx * h; }
    double y_max() const { return y0 + ny * h; }
    /// Cell whose center is nearest to p (clamped to the grid).
    void locate(Vec2 p, int& i, int& j) const {
        i = int(std::floor((p.x - x0) / h));
        j = int(std::floor((p.y - y0) / h));
        i = std::min(std::max(i, 0), nx - 1);
        j = std::min(std::max(j, 0), ny - 1);
    }

    bool operator==(const Grid& o) const = default;
};

struct GridField {
    Grid grid;
    std::vector<double> v;

    GridField() = default;
    explicit GridField(const Grid& g) : grid(g), v(std::size_t(g.size()), 0.0) {}

    double& operator()(int i, int j) { return v[std::size_t(grid.index(i, j))]; }
    double operator()(int i, int j) const { return v[std::size_t(grid.index(i, j))]; }
    double& operator[](std::size_t k) { return v[k]; }
    double operator[](std::size_t k) const { return v[k]; }
    std::size_t size() const { return v.size(); }

    void fill(double val) { std::fill(v.begin(), v.end(), val); }

    GridField& operator+=(const GridField& o) {
        assert(o.v.size() == v.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += o.v[k];
        return *this;
    }
    GridField& operator-=(const GridField& o) {
        assert(o.v.size() == v.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= o.v[k];
        return *this;
    }
    GridField& operator*=(double s) {
        for (auto& x : v) x *= s;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
};

inline GridField operator+(GridField a, const GridField& b) { return a += b; }
inline GridField operator-(GridField a, const GridField& b) { return a -= b; }
inline GridField operator*(double s, GridField a) { return a *= s; }

/// Bilinear interpolation of a cell-centered field at point p.
/// Cells outside the grid contribute zero.
inline double interpolate(const GridField& f, Vec2 p) {
    const Grid& g = f.grid;
    const double gx = (p.x - g.x0) / g.h - 0.5;
    const double gy = (p.y - g.y0) / g.h - 0.5;
    const int i0 = int(std::floor(gx));
    const int j0 = int(std::floor(gy));
    const double fx = gx - i0;
    const double fy = gy - j0;
    auto val = [&](int i, int j) {
        return g.in_bounds(i, j) ? f(i, j) : 0.0;
    };
    return (1 - fx) * (1 - fy) * val(i0, j0) + fx * (1 - fy) * val(i0 + 1, j0) +
           (1 - fx) * fy * val(i0, j0 + 1) + fx * fy * val(i0 + 1, j0 + 1);
}

}  // namespace wb
