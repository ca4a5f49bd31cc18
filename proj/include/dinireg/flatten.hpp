#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "dinireg/diffeo.hpp"
#include "dinireg/regularized_distance.hpp"

namespace dinireg {

using ScalarFn = std::function<double(Vec2)>;
using VectorFn = std::function<Vec2(Vec2)>;
using MatrixFn = std::function<Mat2(Vec2)>;

/// Equation data in nondivergence form: tr(A D^2 u) + b . Du + c u = f.
struct EquationData {
    MatrixFn A;
    VectorFn b;
    ScalarFn c;
    ScalarFn f;
};

/// Output of the distance flattening: the map z = (x1 - x01, psi(x)), the
/// transformed equation data on the flat half-ball B^+(0, 4 s0), the
/// solution-coupled correction field h, and the transported solution.
struct FlattenedProblem {
    DiffeoMap map;
    double s0 = 0.0;
    EquationData data;      // coefficients in z coordinates
    MatrixFn h;             // h^{ij}(x) = D_n u_tilde(z) D_ij psi(x), x coordinates
    ScalarFn u_tilde;       // transported solution u(x(z))
    VectorFn grad_u_tilde;  // chain-rule gradient in z coordinates
    std::shared_ptr<const RegularizedDistance> psi;
    Vec2 x0;
};

/// Flatten a graph-domain patch around the boundary point x0 with the
/// regularized-distance map.  The boundary maps into {z2 = 0}, a Neumann
/// condition D_n u = 0 on the boundary becomes D_n u_tilde = 0 on the flat
/// piece, and the second-order correction is absorbed into
/// f_tilde = f - tr(A h).
inline FlattenedProblem flatten_by_distance(const GraphDomain& dom, const MollifierSpec& zeta,
                                            Vec2 x0, double s, const EquationData& eq,
                                            const ScalarFn& u, const VectorFn& grad_u) {
    if (std::abs(dom.psi0(x0)) > 1e-10)
        throw invalid_input("flatten_by_distance: x0 must lie on the boundary");

    auto psi = std::make_shared<RegularizedDistance>(dom, zeta);
    GraphDomain dom_c = dom;  // owned copies for the returned closures

    auto forward = [psi, x0](Vec2 x) -> Vec2 { return {x.x() - x0.x(), (*psi)(x)}; };
    auto jac = [psi](Vec2 x) -> Mat2 {
        Vec2 g = psi->gradient(x);
        Mat2 J;
        J << 1.0, 0.0, g.x(), g.y();
        return J;
    };
    // solve psi(x1, .) = z2 in the vertical coordinate: safeguarded secant
    // inside an expanding bracket (psi vanishes on the graph and increases
    // into the domain)
    auto inverse = [psi, x0, dom_c](Vec2 z) -> Vec2 {
        const double x1 = z.x() + x0.x();
        auto val = [&](double x2) { return (*psi)({x1, x2}) - z.y(); };
        double lo = dom_c.gamma(x1), hi = lo + std::max(1e-3, 3.0 * z.y());
        double flo = -z.y(), fhi = val(hi);
        int guard = 0;
        while (fhi < 0.0 && guard++ < 60) {
            hi = lo + 2.0 * (hi - lo);
            fhi = val(hi);
        }
        if (guard >= 60) throw numeric_error("flatten_by_distance: inverse bracket failed");
        double a = lo, b = hi, fa = flo, fb = fhi;
        double best = 0.5 * (a + b), best_f = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 90; ++it) {
            // secant step with plain bisection interleaved for a guaranteed
            // bracket-halving rate
            double mid = (it % 2 == 0 && std::abs(fb - fa) > 1e-300)
                             ? std::clamp(a - fa * (b - a) / (fb - fa), a + 0.05 * (b - a),
                                          b - 0.05 * (b - a))
                             : 0.5 * (a + b);
            double fm = val(mid);
            if (std::abs(fm) < best_f) {
                best_f = std::abs(fm);
                best = mid;
            }
            if (fm < 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
                fb = fm;
            }
            if (b - a < 1e-13 * (1.0 + std::abs(b)) || std::abs(fm) < 1e-14) break;
        }
        return {x1, best};
    };

    FlattenedProblem out;
    out.psi = psi;
    out.x0 = x0;
    out.map.forward = forward;
    out.map.inverse = inverse;
    out.map.jacobian = jac;

    // largest s0 with B^+(0, 4 s0) inside the image of the patch
    double s0 = s / 2.0;
    auto fits = [&](double cand) {
        for (int i = 0; i <= 24; ++i) {
            double th = std::numbers::pi * i / 24.0;
            Vec2 z{4.0 * cand * std::cos(th), 4.0 * cand * std::sin(th)};
            Vec2 x;
            try {
                x = inverse(z);
            } catch (const numeric_error&) {
                return false;
            }
            if ((x - x0).norm() > 2.0 * s) return false;
            if (z.y() > 1e-12 && !dom_c.contains(x)) return false;
        }
        return true;
    };
    int tries = 0;
    while (!fits(s0) && tries++ < 40) s0 *= 0.85;
    if (tries >= 40) throw numeric_error("flatten_by_distance: no admissible half-ball radius");
    out.s0 = s0;
    out.map.validity = {{x0.x() - 2 * s, dom.gamma(x0.x()) - 0.1 * s},
                        {x0.x() + 2 * s, x0.y() + 2 * s}};

    // jacobian must stay away from singular over the half-ball preimage
    for (int i = 0; i <= 16; ++i) {
        Vec2 z{-4 * s0 + 8.0 * s0 * i / 16.0, 2.0 * s0};
        Mat2 J = jac(inverse(z));
        if (std::abs(J.determinant()) < 0.05)
            throw numeric_error("flatten_by_distance: jacobian near-singular, shrink the patch");
    }

    // shared per-z evaluation: one inverse, one jacobian
    struct AtZ {
        Vec2 x;
        Mat2 J;
        Vec2 grad_tilde;
    };
    auto at_z = [inverse, jac, grad_u](Vec2 z) -> AtZ {
        AtZ r;
        r.x = inverse(z);
        r.J = jac(r.x);
        r.grad_tilde = r.J.transpose().inverse() * grad_u(r.x);  // Du = J^T Du~
        return r;
    };

    out.u_tilde = [u, inverse](Vec2 z) { return u(inverse(z)); };
    out.grad_u_tilde = [at_z](Vec2 z) { return at_z(z).grad_tilde; };
    out.h = [psi, forward, at_z](Vec2 x) -> Mat2 {
        double dn = at_z(forward(x)).grad_tilde.y();
        return dn * psi->hessian(x);
    };

    EquationData in = eq;
    out.data.A = [in, at_z](Vec2 z) -> Mat2 {
        AtZ r = at_z(z);
        return r.J * in.A(r.x) * r.J.transpose();
    };
    out.data.b = [in, at_z](Vec2 z) -> Vec2 {
        AtZ r = at_z(z);
        return r.J * in.b(r.x);
    };
    out.data.c = [in, inverse](Vec2 z) { return in.c(inverse(z)); };
    out.data.f = [in, at_z, psi](Vec2 z) {
        AtZ r = at_z(z);
        Mat2 h = r.grad_tilde.y() * psi->hessian(r.x);
        return in.f(r.x) - (in.A(r.x) * h).trace();
    };
    return out;
}

/// Empirical verification that the flattened correction field h obeys
/// |h(z)| <= C |D^2 u~|_inf theta(z2) and the matching pairwise bound with
/// theta = rho_{D psi0}, including pairs in the interior regime
/// |z1 - z2| <= z2 / 2.
struct HFieldCheckRow {
    double z2 = 0.0, h_norm = 0.0, ratio = 0.0;
};
struct HFieldCheck {
    std::vector<HFieldCheckRow> pointwise;
    double sup_pointwise_ratio = 0.0;
    double sup_pairwise_ratio = 0.0;
    double sup_pairwise_ratio_mv = 0.0;  // restricted to the mean-value regime
    double hess_sup = 0.0;
    bool pass = false;
};

inline HFieldCheck h_field_modulus_check(const FlattenedProblem& fp, double s0,
                                         int n_samples = 12) {
    const Modulus& theta = fp.psi->domain().rho_dpsi0();
    HFieldCheck out;

    auto hess_norm = [&](Vec2 z) {
        const double h = 1e-4 * std::max(s0, 1e-3);
        Mat2 H;
        Vec2 gxp = fp.grad_u_tilde(z + Vec2{h, 0}), gxm = fp.grad_u_tilde(z - Vec2{h, 0});
        Vec2 gyp = fp.grad_u_tilde(z + Vec2{0, h}), gym = fp.grad_u_tilde(z - Vec2{0, h});
        H(0, 0) = (gxp.x() - gxm.x()) / (2 * h);
        H(0, 1) = (gyp.x() - gym.x()) / (2 * h);
        H(1, 0) = (gxp.y() - gxm.y()) / (2 * h);
        H(1, 1) = (gyp.y() - gym.y()) / (2 * h);
        return H.norm();
    };

    std::vector<Vec2> zs;
    std::vector<Mat2> hs;
    for (int i = 0; i < n_samples; ++i)
        for (int j = 1; j <= n_samples; ++j) {
            Vec2 z{-2.0 * s0 + 4.0 * s0 * i / (n_samples - 1), 2.0 * s0 * j / n_samples};
            zs.push_back(z);
            out.hess_sup = std::max(out.hess_sup, hess_norm(z));
            hs.push_back(fp.h(fp.map.inverse(z)));
        }

    for (std::size_t k = 0; k < zs.size(); ++k) {
        HFieldCheckRow row;
        row.z2 = zs[k].y();
        row.h_norm = hs[k].norm();
        double denom = out.hess_sup * theta.clamped(row.z2);
        row.ratio = denom > 0.0 ? row.h_norm / denom : 0.0;
        out.sup_pointwise_ratio = std::max(out.sup_pointwise_ratio, row.ratio);
        out.pointwise.push_back(row);
    }

    for (std::size_t a = 0; a < zs.size(); a += 2)
        for (std::size_t b = a + 1; b < zs.size(); b += 2) {
            double d = (zs[a] - zs[b]).norm();
            if (d < 1e-12) continue;
            double denom = out.hess_sup * theta.clamped(d);
            if (denom <= 0.0) continue;
            double ratio = (hs[a] - hs[b]).norm() / denom;
            out.sup_pairwise_ratio = std::max(out.sup_pairwise_ratio, ratio);
            if (d <= 0.5 * std::max(zs[a].y(), zs[b].y()))
                out.sup_pairwise_ratio_mv = std::max(out.sup_pairwise_ratio_mv, ratio);
        }

    out.pass = std::isfinite(out.sup_pointwise_ratio) && std::isfinite(out.sup_pairwise_ratio);
    return out;
}

}  // namespace dinireg
