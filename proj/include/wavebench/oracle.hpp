#pragma once

#include <Eigen/Dense>

#include "wavebench/propagator.hpp"

namespace wb {

/// Dense assembly of the spatial operator for small grids, with its own loops
/// (independent of the stencil kernels) so the two can cross-check each other.
struct DenseOperator {
    Grid grid;
    std::vector<int> unknown_of_cell;  // -1 on obstacle cells
    std::vector<int> cell_of_unknown;
    Eigen::VectorXd mass;              // w h^2 per unknown
    Eigen::MatrixXd sym;               // M^{-1/2} L M^{-1/2}
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    int size() const { return int(cell_of_unknown.size()); }

    /// <A u, w>_c with the c-weighted inner product; A = M^{-1} L.
    double weighted_product(const GridField& u, const GridField& w) const {
        // <Au, w>_c = u^T L w ; go through the symmetric form
        Eigen::VectorXd a(size()), b(size());
        for (int p = 0; p < size(); ++p) {
            a[p] = u.v[std::size_t(cell_of_unknown[std::size_t(p)])] *
                   std::sqrt(mass[p]);
            b[p] = w.v[std::size_t(cell_of_unknown[std::size_t(p)])] *
                   std::sqrt(mass[p]);
        }
        return a.dot(sym * b);
    }
};

inline DenseOperator assemble_discrete_operator(const ZoneMap& zm,
                                                int max_unknowns = 2500) {
    DenseOperator op;
    op.grid = zm.grid;
    const Grid& g = zm.grid;
    op.unknown_of_cell.assign(std::size_t(g.size()), -1);
    for (int k = 0; k < g.size(); ++k)
        if (!(zm.flags[std::size_t(k)] & kObstacle)) {
            op.unknown_of_cell[std::size_t(k)] = int(op.cell_of_unknown.size());
            op.cell_of_unknown.push_back(k);
        }
    const int n = op.size();
    if (n > max_unknowns)
        throw TooLargeForOracle(std::to_string(n) + " unknowns exceeds " +
                                std::to_string(max_unknowns));
    if (n == 0) throw ConfigError("no fluid cells");

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    op.mass.resize(n);
    const double h2 = g.h * g.h;
    for (int p = 0; p < n; ++p)
        op.mass[p] = zm.weight[std::size_t(op.cell_of_unknown[std::size_t(p)])] * h2;

    auto unk = [&](int i, int j) -> int {
        if (!g.in_bounds(i, j)) return -1;
        return op.unknown_of_cell[std::size_t(g.index(i, j))];
    };
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int p = unk(i, j);
            if (p < 0) continue;
            struct Nb { int q; double f; };
            const Nb nbs[4] = {
                {unk(i - 1, j), zm.fx[std::size_t(zm.fx_index(i, j))]},
                {unk(i + 1, j), zm.fx[std::size_t(zm.fx_index(i + 1, j))]},
                {unk(i, j - 1), zm.fy[std::size_t(zm.fy_index(i, j))]},
                {unk(i, j + 1), zm.fy[std::size_t(zm.fy_index(i, j + 1))]},
            };
            for (const auto& nb : nbs) {
                if (nb.f == 0.0) continue;
                L(p, p) += nb.f;
                if (nb.q >= 0) L(p, nb.q) -= nb.f;
            }
            const double gxy = zm.gxy[std::size_t(g.index(i, j))];
            if (gxy != 0.0) {
                const int a = unk(i + 1, j), b = unk(i - 1, j);
                const int c = unk(i, j + 1), d = unk(i, j - 1);
                auto add = [&](int r, int s, double val) {
                    if (r >= 0 && s >= 0) {
                        L(r, s) += val;
                        L(s, r) += val;
                    }
                };
                add(a, c, gxy / 4.0);
                add(a, d, -gxy / 4.0);
                add(b, c, -gxy / 4.0);
                add(b, d, gxy / 4.0);
            }
        }
    }

    op.sym.resize(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            op.sym(p, q) = L(p, q) / std::sqrt(op.mass[p] * op.mass[q]);
    // enforce exact symmetry against rounding in the scaling
    op.sym = 0.5 * (op.sym + op.sym.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.sym);
    op.eigenvalues = es.eigenvalues();
    op.eigenvectors = es.eigenvectors();
    return op;
}

/// Exact-in-time solution of the spatially discrete system via the spectrum:
/// u(t) = cos(t sqrt(A)) f1 + A^{-1/2} sin(t sqrt(A)) f2.
inline State propagate_oracle(const DenseOperator& op, const GridField& f1,
                              const GridField& f2, double t) {
    const int n = op.size();
    Eigen::VectorXd a(n), b(n);
    for (int p = 0; p < n; ++p) {
        const std::size_t cell = std::size_t(op.cell_of_unknown[std::size_t(p)]);
        const double sq = std::sqrt(op.mass[p]);
        a[p] = f1.v[cell] * sq;
        b[p] = f2.v[cell] * sq;
    }
    Eigen::VectorXd am = op.eigenvectors.transpose() * a;
    Eigen::VectorXd bm = op.eigenvectors.transpose() * b;
    Eigen::VectorXd um(n), vm(n);
    for (int p = 0; p < n; ++p) {
        const double lam = std::max(op.eigenvalues[p], 0.0);
        const double w = std::sqrt(lam);
        const double c = std::cos(w * t);
        const double s = (w > 1e-14) ? std::sin(w * t) / w : t;
        um[p] = c * am[p] + s * bm[p];
        vm[p] = -lam * s * am[p] + c * bm[p];
    }
    Eigen::VectorXd uu = op.eigenvectors * um;
    Eigen::VectorXd vv = op.eigenvectors * vm;
    State out(op.grid);
    for (int p = 0; p < n; ++p) {
        const std::size_t cell = std::size_t(op.cell_of_unknown[std::size_t(p)]);
        const double sq = std::sqrt(op.mass[p]);
        out.u.v[cell] = uu[p] / sq;
        out.v.v[cell] = vv[p] / sq;
    }
    out.time_stamp = t;
    return out;
}

}  // namespace wb
