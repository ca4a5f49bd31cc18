#pragma once

#include <cmath>
#include <functional>

#include "dinireg/fd_mixed.hpp"
#include "dinireg/fem_conormal.hpp"
#include "dinireg/modulus.hpp"

namespace dinireg {

/// Smooth reference region with a flat bottom squeezed between the half
/// balls of radii 1/2 and 1 (a super-ellipse profile keeps the curved part
/// smooth while the bottom contains the flat segment of length 1).
inline bool reference_region_contains(Vec2 p) {
    constexpr double a = 0.78;
    if (p.y() <= 0.0) return false;
    return std::pow(std::abs(p.x()) / a, 6.0) + std::pow(p.y() / a, 6.0) < 1.0;
}

/// Membership in the scaled copy D(center, s) = s D + center (center on the
/// flat line).
inline bool reference_region_contains(Vec2 p, Vec2 center, double s) {
    return reference_region_contains({(p.x() - center.x()) / s, (p.y() - center.y()) / s});
}

enum class CorrectorMode { divergence, nondivergence };

/// Frozen-coefficient corrector: resolve the defect left by replacing the
/// variable coefficients with their half-ball average, then measure the
/// p-mean of its derivative against the oscillation bound
///   divergence:      (mean |Dw|^p)^{1/p}  vs  omega_A(2r) |Du|_inf + omega_g(2r)
///   nondivergence:   (mean |D^2w|^p)^{1/p} vs omega_A(r) [u]_2 + omega_f(r).
/// The ratio is the empirical constant of the bound.
struct CorrectorReport {
    double p_mean = 0.0;
    double bound_without_constant = 0.0;
    double ratio = 0.0;  // p_mean / bound (empirical constant)
    double du_inf = 0.0;
    DiscreteSolution w;
};

/// Divergence mode on the scaled reference region around a flat-boundary
/// center. u is the parent solution; A/g are the variable data used to form
/// the defect; omega_* are their (measured or exact) moduli.
inline CorrectorReport frozen_corrector_divergence(const DiscreteSolution& u, const MatrixFn& A,
                                                   const VectorFn& g_vec, Vec2 xbar, double r,
                                                   double p, const Modulus& omega_A,
                                                   const Modulus& omega_g) {
    const GridSpec& pg = u.u.grid();
    const double h = std::min(pg.hx(), pg.hy());
    if (r < 8.0 * h) throw numeric_error("frozen_corrector: radius below resolution floor");

    const double s = 2.0 * r;
    GridSpec g;
    g.ax = xbar.x() - 0.8 * s;
    g.bx = xbar.x() + 0.8 * s;
    g.ay = xbar.y();
    g.by = xbar.y() + 0.8 * s;
    int nx = std::max(2, static_cast<int>(std::round((g.bx - g.ax) / h))) + 1;
    int ny = std::max(2, static_cast<int>(std::round((g.by - g.ay) / h))) + 1;
    g.nx = nx;
    g.ny = ny;

    // half-ball averages of A and g over B^+(xbar, 2r)
    Mat2 Abar = Mat2::Zero();
    Vec2 gbar = Vec2::Zero();
    int count = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Vec2 q = g.node(i, j);
            if ((q - xbar).norm() > s || q.y() < xbar.y()) continue;
            Abar += A(q);
            gbar += g_vec(q);
            ++count;
        }
    if (count == 0) throw numeric_error("frozen_corrector: empty averaging region");
    Abar /= count;
    gbar /= count;

    ConormalProblem cp;
    cp.grid = g;
    cp.coeffs.A = [Abar](Vec2) { return Abar; };
    cp.coeffs.lambda = 1e-8;  // validation happens upstream on the variable field
    cp.coeffs.Lambda = 1e8;
    // closed membership so the flat bottom row of cell corners counts
    cp.cell_mask = [xbar, s](Vec2 q) {
        Vec2 rel{(q.x() - xbar.x()) / s, (q.y() - xbar.y()) / s};
        if (rel.y() < -1e-12) return false;
        constexpr double a = 0.78;
        return std::pow(std::abs(rel.x()) / a, 6.0) + std::pow(std::max(rel.y(), 0.0) / a, 6.0) <=
               1.0 + 1e-12;
    };
    cp.g_vec = [&u, &A, Abar, &g_vec, gbar](Vec2 q) -> Vec2 {
        Vec2 du = u.u.gradient(q);
        return -(A(q) - Abar) * du + (g_vec(q) - gbar);
    };
    cp.pin_mean = true;
    DiscreteSolution w = solve_conormal(cp);

    CorrectorReport rep;
    rep.w = w;
    double acc = 0.0;
    int nacc = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Vec2 q = g.node(i, j);
            if (!w.node_active(i, j)) continue;
            if ((q - xbar).norm() > r || q.y() < xbar.y()) continue;
            acc += std::pow(w.u.gradient_at(i, j).norm(), p);
            ++nacc;
            Vec2 dup = u.u.gradient(q);
            rep.du_inf = std::max(rep.du_inf, dup.norm());
        }
    if (nacc == 0) throw numeric_error("frozen_corrector: empty p-mean region");
    rep.p_mean = std::pow(acc / nacc, 1.0 / p);
    rep.bound_without_constant =
        omega_A.clamped(2.0 * r) * rep.du_inf + omega_g.clamped(2.0 * r);
    rep.ratio = rep.bound_without_constant > 1e-14 ? rep.p_mean / rep.bound_without_constant : 0.0;
    return rep;
}

/// Nondivergence mode on the half-disk B^+(xbar, r): defect source
/// -tr((A - Abar) D^2 u) + (f - fbar), mixed boundary conditions.
inline CorrectorReport frozen_corrector_nondivergence(const DiscreteSolution& u, const MatrixFn& A,
                                                      const ScalarFn& f, Vec2 xbar, double r,
                                                      double p, const Modulus& omega_A,
                                                      const Modulus& omega_f) {
    const GridSpec& pg = u.u.grid();
    const double h = std::min(pg.hx(), pg.hy());
    if (r < 8.0 * h) throw numeric_error("frozen_corrector: radius below resolution floor");

    MixedNdProblem mp;
    mp.m = std::max(16, static_cast<int>(std::round(r / h)));
    mp.center = xbar;
    mp.R = r;

    Mat2 Abar = Mat2::Zero();
    double fbar = 0.0;
    int count = 0;
    GridSpec sg{xbar.x() - r, xbar.x() + r, xbar.y(), xbar.y() + r, 2 * mp.m + 1, mp.m + 1};
    for (int j = 0; j < sg.ny; ++j)
        for (int i = 0; i < sg.nx; ++i) {
            Vec2 q = sg.node(i, j);
            if ((q - xbar).norm() > r) continue;
            Abar += A(q);
            fbar += f(q);
            ++count;
        }
    Abar /= count;
    fbar /= count;

    mp.A = [Abar](Vec2) { return Abar; };
    mp.f = [&u, &A, Abar, &f, fbar](Vec2 q) {
        Mat2 H = u.u.hessian(q);
        return -((A(q) - Abar) * H).trace() + (f(q) - fbar);
    };
    auto res = solve_mixed_nd(mp);

    CorrectorReport rep;
    rep.w = res.sol;
    const GridSpec& wg = res.sol.u.grid();
    double acc = 0.0;
    double u2 = 0.0;
    int nacc = 0;
    for (int j = 1; j + 1 < wg.ny; ++j)
        for (int i = 1; i + 1 < wg.nx; ++i) {
            if (!res.sol.node_active(i, j)) continue;
            Vec2 q = wg.node(i, j);
            if ((q - xbar).norm() > 0.9 * r) continue;
            acc += std::pow(res.sol.u.hessian_at(i, j).norm(), p);
            ++nacc;
            u2 = std::max(u2, u.u.hessian(q).norm());
        }
    if (nacc == 0) throw numeric_error("frozen_corrector: empty p-mean region");
    rep.p_mean = std::pow(acc / nacc, 1.0 / p);
    rep.du_inf = u2;
    rep.bound_without_constant = omega_A.clamped(r) * u2 + omega_f.clamped(r);
    rep.ratio = rep.bound_without_constant > 1e-14 ? rep.p_mean / rep.bound_without_constant : 0.0;
    return rep;
}

}  // namespace dinireg
