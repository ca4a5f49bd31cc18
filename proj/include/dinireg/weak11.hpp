#pragma once

#include <cmath>
#include <vector>

#include "dinireg/corrector.hpp"
#include "dinireg/fd_mixed.hpp"
#include "dinireg/fem_conormal.hpp"

namespace dinireg {

/// Distribution-function profile C(t) = t |{ |D u| > t }| / ||data||_L1
/// over several decades of t; bounded C certifies the weak-(1,1) behavior
/// that replaces a false strong L1 bound.
struct Weak11Profile {
    std::vector<double> thresholds;
    std::vector<double> C;
    double sup_C = 0.0;
    double data_l1 = 0.0;
    std::vector<double> annulus_l1;  // integral of |Du| over dyadic annuli
};

/// Smooth radial bump supported in |x| < 1 (normalized height 1).
inline double bump(double r) {
    if (r >= 1.0) return 0.0;
    double w = 1.0 - r * r;
    return w * w * w;
}

/// Conormal/divergence variant on the reference region: data is the
/// gradient of a scaled bump (mean zero per component), supported in
/// B(ybar, r).
inline Weak11Profile weak11_profile_divergence(const Mat2& Abar, Vec2 ybar, double r, int m,
                                               int n_thresholds = 25) {
    GridSpec g{-0.8, 0.8, 0.0, 0.8, 2 * m + 1, m + 1};
    auto grad_bump = [ybar, r](Vec2 q) -> Vec2 {
        Vec2 d = (q - ybar) / r;
        double rr = d.norm();
        if (rr >= 1.0) return Vec2::Zero();
        double w = 1.0 - rr * rr;
        // d/dx of (1-|x|^2)^3 = -6 x (1-|x|^2)^2
        return (-6.0 * w * w / r) * d;
    };

    ConormalProblem cp;
    cp.grid = g;
    cp.coeffs.A = [Abar](Vec2) { return Abar; };
    cp.cell_mask = [](Vec2 q) {
        if (q.y() < -1e-12) return false;
        constexpr double a = 0.78;
        return std::pow(std::abs(q.x()) / a, 6.0) + std::pow(std::max(q.y(), 0.0) / a, 6.0) <=
               1.0 + 1e-12;
    };
    cp.g_vec = grad_bump;
    cp.pin_mean = true;
    DiscreteSolution u = solve_conormal(cp);

    Weak11Profile out;
    const double cell = g.hx() * g.hy();
    std::vector<double> du;
    double du_max = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!u.node_active(i, j)) continue;
            Vec2 q = g.node(i, j);
            double d = u.u.gradient_at(i, j).norm();
            du.push_back(d);
            du_max = std::max(du_max, d);
            out.data_l1 += grad_bump(q).norm() * cell;
            int shell = 0;
            double rr = (q - ybar).norm();
            while (rr > r * std::pow(2.0, shell + 1) && shell < 7) ++shell;
            if (static_cast<std::size_t>(shell) >= out.annulus_l1.size())
                out.annulus_l1.resize(shell + 1, 0.0);
            if (rr > 2.0 * r) out.annulus_l1[shell] += d * cell;
        }

    for (int k = 0; k < n_thresholds; ++k) {
        double t = du_max * std::pow(10.0, -3.5 * (1.0 - static_cast<double>(k) / (n_thresholds - 1)));
        double meas = 0.0;
        for (double d : du)
            if (d > t) meas += cell;
        out.thresholds.push_back(t);
        out.C.push_back(t * meas / std::max(out.data_l1, 1e-300));
        out.sup_C = std::max(out.sup_C, out.C.back());
    }
    return out;
}

/// Mixed/nondivergence variant on the half-disk: f is a unit-mass bump,
/// profiled quantity is |D^2 u|.
inline Weak11Profile weak11_profile_nondivergence(const Mat2& Abar, Vec2 src, double r, int m,
                                                  int n_thresholds = 25) {
    MixedNdProblem mp;
    mp.m = m;
    mp.A = [Abar](Vec2) { return Abar; };
    // normalize the bump to unit mass
    double mass = 0.0;
    {
        int nn = 200;
        for (int j = 0; j <= nn; ++j)
            for (int i = 0; i <= nn; ++i) {
                Vec2 q{-1.0 + 2.0 * i / nn, 2.0 * static_cast<double>(j) / nn - 1.0};
                mass += bump((q - Vec2{0, 0}).norm());
            }
        mass *= 4.0 / (nn * nn);  // integral of bump over the plane at scale 1
    }
    const double amp = 1.0 / (mass * r * r);
    mp.f = [src, r, amp](Vec2 q) { return amp * bump((q - src).norm() / r); };
    auto res = solve_mixed_nd(mp);

    Weak11Profile out;
    const GridSpec& g = res.sol.u.grid();
    const double cell = g.hx() * g.hy();
    std::vector<double> d2;
    double d2_max = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            if (!res.sol.node_active(i, j)) continue;
            if ((g.node(i, j) - mp.center).norm() > 0.92 * mp.R) continue;  // skip collar noise
            double d = res.sol.u.hessian_at(i, j).norm();
            d2.push_back(d);
            d2_max = std::max(d2_max, d);
            out.data_l1 += mp.f(g.node(i, j)) * cell;
        }
    for (int k = 0; k < n_thresholds; ++k) {
        double t = d2_max * std::pow(10.0, -3.5 * (1.0 - static_cast<double>(k) / (n_thresholds - 1)));
        double meas = 0.0;
        for (double d : d2)
            if (d > t) meas += cell;
        out.thresholds.push_back(t);
        out.C.push_back(t * meas / std::max(out.data_l1, 1e-300));
        out.sup_C = std::max(out.sup_C, out.C.back());
    }
    return out;
}

}  // namespace dinireg
