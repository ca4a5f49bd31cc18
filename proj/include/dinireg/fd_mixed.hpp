#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <functional>
#include <vector>

#include "dinireg/coefficient_field.hpp"
#include "dinireg/grid_field.hpp"

namespace dinireg {

/// Strong-form 9-point solve of tr(A D^2 u) = f on the upper half-disk of
/// radius R around `center` (center on the line {y = center.y}):
///   u = dirichlet on the curved part, D_n u = 0 on the flat part (ghost
///   reflection).  Collar nodes next to the curved boundary are closed by
///   linear interpolation along the axis that crosses the circle (cut-cell
///   closure; order drops locally and is logged by the caller via
///   collar_count).
struct MixedNdProblem {
    int m = 64;  // subdivisions per radius; grid (2m+1) x (m+1)
    Vec2 center{0.0, 0.0};
    double R = 1.0;
    MatrixFn A = [](Vec2) { return Mat2::Identity(); };
    ScalarFn f = [](Vec2) { return 0.0; };
    ScalarFn dirichlet = [](Vec2) { return 0.0; };
};

struct MixedNdResult {
    DiscreteSolution sol;
    int collar_count = 0;
};

namespace detail {

struct StencilTarget {
    Eigen::SparseMatrix<double>* K;
    std::vector<Eigen::Triplet<double>>* trips;
};

}  // namespace detail

inline MixedNdResult solve_mixed_nd(const MixedNdProblem& prob) {
    const int m = prob.m;
    const double h = prob.R / m;
    GridSpec g{prob.center.x() - prob.R, prob.center.x() + prob.R, prob.center.y(),
               prob.center.y() + prob.R, 2 * m + 1, m + 1};

    auto r2 = [&](Vec2 p) { return (p - prob.center).squaredNorm(); };
    auto inside = [&](int i, int j) {
        if (i < 0 || i >= g.nx || j < 0) return false;
        if (j >= g.ny) return false;
        return r2(g.node(i, j)) <= sqr(prob.R) * (1.0 + 1e-14);
    };

    const int n = g.size();
    enum class Row { outside, interior, flat, collar };
    std::vector<Row> row(n, Row::outside);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!inside(i, j)) continue;
            bool full = true;
            for (int dj = -1; dj <= 1 && full; ++dj)
                for (int di = -1; di <= 1 && full; ++di) {
                    int jj = j + dj;
                    if (j == 0 && jj < 0) jj = -jj;  // ghost row reflects
                    if (!inside(i + di, jj)) full = false;
                }
            if (full)
                row[g.index(i, j)] = (j == 0) ? Row::flat : Row::interior;
            else
                row[g.index(i, j)] = Row::collar;
        }

    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    MixedNdResult out;

    auto add = [&](int r, int i, int j, double v) {
        // fold the ghost row back up across the flat boundary
        if (j < 0) j = -j;
        trips.emplace_back(r, g.index(i, j), v);
    };

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.index(i, j);
            const Vec2 p = g.node(i, j);
            switch (row[k]) {
                case Row::outside:
                    trips.emplace_back(k, k, 1.0);
                    rhs[k] = 0.0;
                    break;
                case Row::interior:
                case Row::flat: {
                    const Mat2 A = prob.A(p);
                    const double axx = A(0, 0) / (h * h), ayy = A(1, 1) / (h * h);
                    const double axy = (A(0, 1) + A(1, 0)) / (4.0 * h * h);
                    add(k, i + 1, j, axx);
                    add(k, i - 1, j, axx);
                    add(k, i, j + 1, ayy);
                    add(k, i, j - 1, ayy);
                    add(k, i, j, -2.0 * (axx + ayy));
                    add(k, i + 1, j + 1, axy);
                    add(k, i - 1, j - 1, axy);
                    add(k, i + 1, j - 1, -axy);
                    add(k, i - 1, j + 1, -axy);
                    rhs[k] = prob.f(p);
                    break;
                }
                case Row::collar: {
                    // close along the axis with the nearest circle crossing
                    ++out.collar_count;
                    int best_di = 0, best_dj = 0;
                    double best_sigma = 2.0;
                    for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                        int jj = j + dj;
                        if (j == 0 && jj < 0) continue;
                        if (inside(i + di, jj)) continue;
                        // solve |p + sigma h e - center|^2 = R^2 on [0,1]
                        Vec2 e{static_cast<double>(di), static_cast<double>(dj)};
                        Vec2 d = p - prob.center;
                        double bq = d.dot(e) * h, aq = h * h;
                        double cq = d.squaredNorm() - sqr(prob.R);
                        double disc = bq * bq - aq * cq;
                        if (disc < 0.0) continue;
                        double sigma = (-bq + std::sqrt(disc)) / aq;
                        if (sigma >= -1e-12 && sigma < best_sigma) {
                            best_sigma = std::max(sigma, 1e-6);
                            best_di = di;
                            best_dj = dj;
                        }
                    }
                    if (best_sigma > 1.5) {
                        // isolated sliver: clamp to the boundary value
                        Vec2 d = p - prob.center;
                        Vec2 bpt = prob.center + prob.R * d / std::max(d.norm(), 1e-14);
                        trips.emplace_back(k, k, 1.0);
                        rhs[k] = prob.dirichlet(bpt);
                        break;
                    }
                    Vec2 e{static_cast<double>(best_di), static_cast<double>(best_dj)};
                    Vec2 bpt = p + best_sigma * h * e;
                    int qi = i - best_di, qj = j - best_dj;
                    if (qj < 0) qj = -qj;
                    const double sig = best_sigma;
                    trips.emplace_back(k, k, 1.0);
                    trips.emplace_back(k, g.index(qi, qj), -sig / (1.0 + sig));
                    rhs[k] = prob.dirichlet(bpt) / (1.0 + sig);
                    break;
                }
            }
        }

    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trips.begin(), trips.end());
    K.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw numeric_error("solve_mixed_nd: factorization failed");
    Eigen::VectorXd sol = lu.solve(rhs);

    std::vector<char> active(n, 0);
    for (int k = 0; k < n; ++k) active[k] = row[k] != Row::outside;
    out.sol = DiscreteSolution{ScalarField(g, std::vector<double>(sol.data(), sol.data() + n)),
                               (K * sol - rhs).norm(), active};
    return out;
}

/// Full-disk Dirichlet solve with y-dependent coefficients (for the
/// reflection construction): tr(A(x) D^2 u) = f on B(center, R), u = g on
/// the circle.
struct FullDiskProblem {
    int m = 64;
    Vec2 center{0.0, 0.0};
    double R = 1.0;
    MatrixFn A = [](Vec2) { return Mat2::Identity(); };
    ScalarFn f = [](Vec2) { return 0.0; };
    ScalarFn dirichlet = [](Vec2) { return 0.0; };
};

inline MixedNdResult solve_full_disk(const FullDiskProblem& prob) {
    const int m = prob.m;
    const double h = prob.R / m;
    GridSpec g{prob.center.x() - prob.R, prob.center.x() + prob.R, prob.center.y() - prob.R,
               prob.center.y() + prob.R, 2 * m + 1, 2 * m + 1};

    auto r2 = [&](Vec2 p) { return (p - prob.center).squaredNorm(); };
    auto inside = [&](int i, int j) {
        if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) return false;
        return r2(g.node(i, j)) <= sqr(prob.R) * (1.0 + 1e-14);
    };

    const int n = g.size();
    enum class Row { outside, interior, collar };
    std::vector<Row> row(n, Row::outside);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!inside(i, j)) continue;
            bool full = true;
            for (int dj = -1; dj <= 1 && full; ++dj)
                for (int di = -1; di <= 1 && full; ++di)
                    if (!inside(i + di, j + dj)) full = false;
            row[g.index(i, j)] = full ? Row::interior : Row::collar;
        }

    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    MixedNdResult out;

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.index(i, j);
            const Vec2 p = g.node(i, j);
            switch (row[k]) {
                case Row::outside:
                    trips.emplace_back(k, k, 1.0);
                    break;
                case Row::interior: {
                    const Mat2 A = prob.A(p);
                    const double axx = A(0, 0) / (h * h), ayy = A(1, 1) / (h * h);
                    const double axy = (A(0, 1) + A(1, 0)) / (4.0 * h * h);
                    trips.emplace_back(k, g.index(i + 1, j), axx);
                    trips.emplace_back(k, g.index(i - 1, j), axx);
                    trips.emplace_back(k, g.index(i, j + 1), ayy);
                    trips.emplace_back(k, g.index(i, j - 1), ayy);
                    trips.emplace_back(k, k, -2.0 * (axx + ayy));
                    trips.emplace_back(k, g.index(i + 1, j + 1), axy);
                    trips.emplace_back(k, g.index(i - 1, j - 1), axy);
                    trips.emplace_back(k, g.index(i + 1, j - 1), -axy);
                    trips.emplace_back(k, g.index(i - 1, j + 1), -axy);
                    rhs[k] = prob.f(p);
                    break;
                }
                case Row::collar: {
                    ++out.collar_count;
                    int best_di = 0, best_dj = 0;
                    double best_sigma = 2.0;
                    for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                        if (inside(i + di, j + dj)) continue;
                        Vec2 e{static_cast<double>(di), static_cast<double>(dj)};
                        Vec2 d = p - prob.center;
                        double bq = d.dot(e) * h, aq = h * h;
                        double cq = d.squaredNorm() - sqr(prob.R);
                        double disc = bq * bq - aq * cq;
                        if (disc < 0.0) continue;
                        double sigma = (-bq + std::sqrt(disc)) / aq;
                        if (sigma >= -1e-12 && sigma < best_sigma) {
                            best_sigma = std::max(sigma, 1e-6);
                            best_di = di;
                            best_dj = dj;
                        }
                    }
                    if (best_sigma > 1.5) {
                        Vec2 d = p - prob.center;
                        Vec2 bpt = prob.center + prob.R * d / std::max(d.norm(), 1e-14);
                        trips.emplace_back(k, k, 1.0);
                        rhs[k] = prob.dirichlet(bpt);
                        break;
                    }
                    Vec2 e{static_cast<double>(best_di), static_cast<double>(best_dj)};
                    Vec2 bpt = p + best_sigma * h * e;
                    const double sig = best_sigma;
                    trips.emplace_back(k, k, 1.0);
                    trips.emplace_back(k, g.index(i - best_di, j - best_dj), -sig / (1.0 + sig));
                    rhs[k] = prob.dirichlet(bpt) / (1.0 + sig);
                    break;
                }
            }
        }

    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trips.begin(), trips.end());
    K.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw numeric_error("solve_full_disk: factorization failed");
    Eigen::VectorXd sol = lu.solve(rhs);

    std::vector<char> active(n, 0);
    for (int k = 0; k < n; ++k) active[k] = row[k] != Row::outside;
    out.sol = DiscreteSolution{ScalarField(g, std::vector<double>(sol.data(), sol.data() + n)),
                               (K * sol - rhs).norm(), active};
    return out;
}

/// Reflection construction: normalize a constant symmetric matrix so
/// a22 = 1, flip the sign of the off-diagonal second-row entries below the
/// line {y = 0}, and extend the source evenly.  Solving the full-disk
/// Dirichlet problem with the flipped coefficients produces an even
/// solution whose upper-half restriction solves the mixed problem.
struct ReflectedData {
    MatrixFn A_hat;  // piecewise-constant in the sign of y
    ScalarFn f_hat;  // even extension
    Mat2 A_upper;    // normalized coefficients on the upper half
};

inline ReflectedData reflect_extend(Mat2 A_const, const ScalarFn& f) {
    if (std::abs(A_const(0, 1) - A_const(1, 0)) > 1e-12)
        throw invalid_input("reflect_extend: matrix must be symmetric");
    if (A_const(1, 1) <= 0.0)
        throw invalid_input("reflect_extend: a22 must be positive (ellipticity)");
    const Mat2 An = A_const / A_const(1, 1);
    const double scale = A_const(1, 1);
    ReflectedData out;
    out.A_upper = An;
    out.A_hat = [An](Vec2 p) -> Mat2 {
        Mat2 m = An;
        if (p.y() < 0.0) {
            m(0, 1) = -An(0, 1);
            m(1, 0) = -An(1, 0);
        }
        return m;
    };
    out.f_hat = [f, scale](Vec2 p) { return f({p.x(), std::abs(p.y())}) / scale; };
    return out;
}

}  // namespace dinireg
