#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "dinireg/coefficient_field.hpp"
#include "dinireg/grid_field.hpp"

namespace dinireg {

/// Discrete solution of one of the elliptic solves: the solution field with
/// its finite-difference evaluators plus the algebraic residual.
struct DiscreteSolution {
    ScalarField u;
    double residual_norm = 0.0;
    std::vector<char> active;  // per-node mask (1 = unknown participated)

    bool node_active(int i, int j) const {
        return active.empty() || active[u.grid().index(i, j)] != 0;
    }
};

enum class EdgeBC { dirichlet, conormal };

/// Divergence-form problem on a box (or a masked cell subset):
///   div(A grad u + a_vec u) + b_vec . grad u + c u = div g_vec + f,
///   (A grad u + a_vec u - g_vec) . nu + a0 u = g0   on the conormal part.
/// Bilinear elements on the tensor grid, 2x2 Gauss cells, edge quadrature
/// on exposed boundary faces.  A pure-Neumann singular system must be
/// pinned (mean-zero constraint via a bordered row).
struct ConormalProblem {
    GridSpec grid;
    CoefficientField coeffs;
    VectorFn g_vec = [](Vec2) { return Vec2::Zero().eval(); };
    ScalarFn g0 = [](Vec2) { return 0.0; };
    ScalarFn f = [](Vec2) { return 0.0; };
    // sides: 0 = left, 1 = right, 2 = bottom, 3 = top
    std::array<EdgeBC, 4> sides{EdgeBC::conormal, EdgeBC::conormal, EdgeBC::conormal,
                                EdgeBC::conormal};
    ScalarFn dirichlet = [](Vec2) { return 0.0; };
    std::function<bool(Vec2)> cell_mask;  // optional: active iff all 4 corners pass
    bool pin_mean = false;
};

namespace detail {

struct QuadPoint {
    double xi, eta, w;
};

inline const std::array<QuadPoint, 4>& cell_gauss() {
    static const double g = 0.5 - 0.5 / std::sqrt(3.0);
    static const std::array<QuadPoint, 4> pts{QuadPoint{g, g, 0.25}, QuadPoint{1 - g, g, 0.25},
                                              QuadPoint{g, 1 - g, 0.25},
                                              QuadPoint{1 - g, 1 - g, 0.25}};
    return pts;
}

}  // namespace detail

inline DiscreteSolution solve_conormal(const ConormalProblem& prob) {
    const GridSpec& g = prob.grid;
    const double hx = g.hx(), hy = g.hy();
    const int n = g.size();

    // active cells and nodes
    const int cx = g.nx - 1, cy = g.ny - 1;
    std::vector<char> cell_on(cx * cy, 1);
    if (prob.cell_mask) {
        for (int j = 0; j < cy; ++j)
            for (int i = 0; i < cx; ++i) {
                bool on = prob.cell_mask(g.node(i, j)) && prob.cell_mask(g.node(i + 1, j)) &&
                          prob.cell_mask(g.node(i, j + 1)) && prob.cell_mask(g.node(i + 1, j + 1));
                cell_on[j * cx + i] = on ? 1 : 0;
            }
    }
    std::vector<char> node_on(n, 0);
    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i)
            if (cell_on[j * cx + i]) {
                node_on[g.index(i, j)] = node_on[g.index(i + 1, j)] = 1;
                node_on[g.index(i, j + 1)] = node_on[g.index(i + 1, j + 1)] = 1;
            }

    // Dirichlet nodes: nodes on a dirichlet side of the box
    std::vector<char> dir(n, 0);
    auto side_is_dir = [&](int s) { return prob.sides[s] == EdgeBC::dirichlet; };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!node_on[g.index(i, j)]) continue;
            if ((i == 0 && side_is_dir(0)) || (i == g.nx - 1 && side_is_dir(1)) ||
                (j == 0 && side_is_dir(2)) || (j == g.ny - 1 && side_is_dir(3)))
                dir[g.index(i, j)] = 1;
        }

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    trips.reserve(static_cast<std::size_t>(n) * 12);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + (prob.pin_mean ? 1 : 0));

    // reference bilinear basis
    auto shape = [](double xi, double eta, int a) {
        switch (a) {
            case 0: return (1 - xi) * (1 - eta);
            case 1: return xi * (1 - eta);
            case 2: return (1 - xi) * eta;
            default: return xi * eta;
        }
    };
    auto dshape = [&](double xi, double eta, int a) -> Vec2 {
        switch (a) {
            case 0: return {-(1 - eta), -(1 - xi)};
            case 1: return {(1 - eta), -xi};
            case 2: return {-eta, (1 - xi)};
            default: return {eta, xi};
        }
    };

    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i) {
            if (!cell_on[j * cx + i]) continue;
            const int loc[4] = {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1),
                                g.index(i + 1, j + 1)};
            const Vec2 base = g.node(i, j);
            for (const auto& q : detail::cell_gauss()) {
                const Vec2 xq{base.x() + q.xi * hx, base.y() + q.eta * hy};
                const double wq = q.w * hx * hy;
                const Mat2 Aq = prob.coeffs.A(xq);
                const Vec2 aq = prob.coeffs.a_vec(xq);
                const Vec2 bq = prob.coeffs.b_vec(xq);
                const double cq = prob.coeffs.c(xq);
                const Vec2 gq = prob.g_vec(xq);
                const double fq = prob.f(xq);
                Vec2 grad[4];
                double val[4];
                for (int a = 0; a < 4; ++a) {
                    Vec2 d = dshape(q.xi, q.eta, a);
                    grad[a] = {d.x() / hx, d.y() / hy};
                    val[a] = shape(q.xi, q.eta, a);
                }
                for (int a = 0; a < 4; ++a) {
                    rhs[loc[a]] += wq * (gq.dot(grad[a]) - fq * val[a]);
                    for (int b2 = 0; b2 < 4; ++b2) {
                        double k = grad[a].dot(Aq * grad[b2]) + grad[a].dot(aq) * val[b2] -
                                   val[a] * bq.dot(grad[b2]) - val[a] * cq * val[b2];
                        trips.emplace_back(loc[a], loc[b2], wq * k);
                    }
                }
            }
        }

    // exposed faces: cell edge whose neighboring cell is absent.  Dirichlet
    // sides skip the flux integral (values are pinned there instead).
    auto face_conormal = [&](int i0, int j0, int i1, int j1, int side) {
        // side: which box side this face would belong to when on the hull;
        // -1 marks an interior exposed face (mask boundary), always conormal
        if (side >= 0 && side_is_dir(side)) return;
        const int n0 = g.index(i0, j0), n1 = g.index(i1, j1);
        const Vec2 p0 = g.node(i0, j0), p1 = g.node(i1, j1);
        const double len = (p1 - p0).norm();
        // two-point Gauss on the edge
        for (double t : {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)}) {
            Vec2 xq = p0 + t * (p1 - p0);
            double w = 0.5 * len;
            double a0q = prob.coeffs.a0(xq);
            double g0q = prob.g0(xq);
            double v0 = 1 - t, v1 = t;
            trips.emplace_back(n0, n0, w * a0q * v0 * v0);
            trips.emplace_back(n0, n1, w * a0q * v0 * v1);
            trips.emplace_back(n1, n0, w * a0q * v1 * v0);
            trips.emplace_back(n1, n1, w * a0q * v1 * v1);
            rhs[n0] += w * g0q * v0;
            rhs[n1] += w * g0q * v1;
        }
    };
    auto cell_at = [&](int i, int j) {
        return i >= 0 && i < cx && j >= 0 && j < cy && cell_on[j * cx + i];
    };
    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i) {
            if (!cell_on[j * cx + i]) continue;
            if (!cell_at(i - 1, j)) face_conormal(i, j, i, j + 1, i == 0 ? 0 : -1);
            if (!cell_at(i + 1, j)) face_conormal(i + 1, j, i + 1, j + 1, i == cx - 1 ? 1 : -1);
            if (!cell_at(i, j - 1)) face_conormal(i, j, i + 1, j, j == 0 ? 2 : -1);
            if (!cell_at(i, j + 1)) face_conormal(i, j + 1, i + 1, j + 1, j == cy - 1 ? 3 : -1);
        }

    const int dim = n + (prob.pin_mean ? 1 : 0);
    Eigen::SparseMatrix<double> K(dim, dim);

    // assemble with row replacement for dirichlet/inactive nodes
    std::vector<Trip> final_trips;
    final_trips.reserve(trips.size() + 4 * n);
    for (const auto& t : trips) {
        if (dir[t.row()] || !node_on[t.row()]) continue;
        final_trips.push_back(t);
    }
    int active_count = 0;
    for (int k = 0; k < n; ++k) {
        if (dir[k] || !node_on[k]) {
            final_trips.emplace_back(k, k, 1.0);
            int i = k % g.nx, j = k / g.nx;
            rhs[k] = node_on[k] ? prob.dirichlet(g.node(i, j)) : 0.0;
        } else if (prob.pin_mean) {
            final_trips.emplace_back(k, n, 1.0);
            final_trips.emplace_back(n, k, 1.0);
            ++active_count;
        }
    }
    if (prob.pin_mean) {
        if (active_count == 0) throw invalid_input("solve_conormal: nothing to pin");
        rhs[n] = 0.0;
    }
    K.setFromTriplets(final_trips.begin(), final_trips.end());
    K.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success)
        throw numeric_error(
            "solve_conormal: singular system (pure-Neumann problem without pinning?)");
    Eigen::VectorXd sol = lu.solve(rhs);

    DiscreteSolution out{ScalarField(g, std::vector<double>(sol.data(), sol.data() + n)),
                         (K * sol - rhs).norm(), node_on};
    return out;
}

}  // namespace dinireg
