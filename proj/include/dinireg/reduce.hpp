#pragma once

#include <memory>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "dinireg/boundary_lift.hpp"
#include "dinireg/dini_integral.hpp"
#include "dinireg/flatten.hpp"
#include "dinireg/straightening.hpp"

namespace dinireg {

/// Full oblique problem on a graph domain: tr(A D^2 u) + b.Du + c u = f
/// inside, beta0 u + beta . grad u = g on the boundary.
struct ObliqueProblemSpec {
    EquationData eq;
    ObliqueField bc;
    ScalarFn g;
    GraphDomain dom = GraphDomain::flat();
};

/// Measured moduli of the data, used for the source-modulus assembly.
struct DataModuli {
    Modulus omega_f, omega_A, omega_b, omega_c;
    Modulus rho_dg, rho_g;
    double b_inf = 0.0, c_inf = 0.0, g_c1 = 0.0;
};

/// Source modulus after the boundary-data subtraction:
///   omega0(t) = omega_A + omega_b + t|b| + omega_c + t|c|
///   omega1(t) = (int_0^r rho_Dgamma/t) (omega_A(t)+t|b|)
///               + int_0^t (rho_Dg + rho_Dgamma)/s ds
///   omega_f0(t) = omega_f(t) + int_0^t rho_Dg/s ds
///               + (|g|_1 + int_0^r rho_Dg/t) omega0(t) + omega1(t)
/// (unit constants; the comparison constant is fitted downstream).
inline Modulus assemble_omega_f0(const DataModuli& dm, const Modulus& rho_dgamma, double r) {
    double dg_tail = dini_integral(dm.rho_dg, 0.0, std::min(r, dm.rho_dg.right_end())).value;
    double dgam_tail =
        dini_integral(rho_dgamma, 0.0, std::min(r, rho_dgamma.right_end())).value;
    DataModuli d = dm;
    Modulus rg = rho_dgamma;
    double g1 = dm.g_c1;
    auto eval = [d, rg, dg_tail, dgam_tail, g1](double t) {
        double omega0 = d.omega_A.clamped(t) + d.omega_b.clamped(t) + t * d.b_inf +
                        d.omega_c.clamped(t) + t * d.c_inf;
        double cum_dg = dini_integral(d.rho_dg, 0.0, std::min(t, d.rho_dg.right_end())).value;
        double cum_dgam = dini_integral(rg, 0.0, std::min(t, rg.right_end())).value;
        double omega1 = dgam_tail * (d.omega_A.clamped(t) + t * d.b_inf) + cum_dg + cum_dgam;
        return d.omega_f.clamped(t) + cum_dg + (g1 + dg_tail) * omega0 + omega1;
    };
    return Modulus::derived(eval, 1.0, "omega_f0");
}

/// Everything produced by the reduction: the three maps, the equation data
/// on the flat half-ball with D_n u~ = 0 on the flat piece, the transported
/// solution, and a provenance log.
struct ReducedProblem {
    StraighteningResult straight;
    std::shared_ptr<BoundaryLift> lift;
    GraphDomain y_domain = GraphDomain::flat();
    FlattenedProblem flat;
    EquationData data_y;    // coefficients in straightened (y) coordinates
    ScalarFn u0_y;          // u - v in y coordinates
    VectorFn grad_u0_y;
    Modulus omega_f0;       // assembled source modulus
    nlohmann::json provenance;

    /// sup |D_n u~| over the flat trace of the final half-ball, one-sided FD.
    double flat_trace_normal_derivative(int n_pts = 15) const {
        double worst = 0.0;
        const double s0 = flat.s0;
        for (int i = 0; i < n_pts; ++i) {
            double z1 = -2.0 * s0 + 4.0 * s0 * i / (n_pts - 1);
            const double h = 1e-4 * s0;
            double u0 = flat.u_tilde({z1, 0.0});
            double u1 = flat.u_tilde({z1, h});
            double u2 = flat.u_tilde({z1, 2 * h});
            worst = std::max(worst, std::abs((-3 * u0 + 4 * u1 - u2) / (2 * h)));
        }
        return worst;
    }
};

/// Reduce an oblique problem to a homogeneous vertical-derivative problem
/// on a flat half-ball:
///   1. absorb the zeroth-order boundary term, g1 = g - beta0 u,
///   2. straighten beta into the vertical by the boundary-seeded flow,
///   3. subtract the boundary lift of the transported data,
///   4. flatten by the regularized distance.
/// The caller supplies the (discrete) solution and its gradient to evaluate
/// the solution-coupled stages.
inline ReducedProblem reduce_to_neumann(const ObliqueProblemSpec& prob,
                                        const MollifierSpec& zeta, Vec2 x0, double r,
                                        const ScalarFn& u, const VectorFn& grad_u,
                                        const DataModuli& dm) {
    ReducedProblem out;

    // stage 1: boundary data with the zeroth-order term absorbed
    ObliqueProblemSpec p = prob;
    auto g1 = [p, u](Vec2 x) { return p.g(x) - p.bc.beta0(x) * u(x); };

    // stage 2: straightening flow
    out.straight = straightening_flow(p.bc, p.dom, zeta, x0, r);
    const StraighteningResult& st = out.straight;
    const double rp = st.patch_radius;

    auto x_of_y = st.map.inverse;
    auto dx_of_y = st.flow_jacobian;

    // second derivatives of the inverse coordinates y(x), expressed at y
    auto d2y = [dx_of_y, rp](Vec2 y) {
        const double h = 1e-4 * std::max(rp, 1e-3);
        Mat2 jxp = dx_of_y(y + Vec2{h, 0}), jxm = dx_of_y(y - Vec2{h, 0});
        Mat2 jyp = dx_of_y(y + Vec2{0, h}), jym = dx_of_y(y - Vec2{0, h});
        // D^2 x in y coordinates
        std::array<Mat2, 2> d2x;
        for (int m = 0; m < 2; ++m) {
            Mat2 H;
            H(0, 0) = (jxp(m, 0) - jxm(m, 0)) / (2 * h);
            H(0, 1) = (jyp(m, 0) - jym(m, 0)) / (2 * h);
            H(1, 0) = (jxp(m, 1) - jxm(m, 1)) / (2 * h);
            H(1, 1) = (jyp(m, 1) - jym(m, 1)) / (2 * h);
            double sym = 0.5 * (H(0, 1) + H(1, 0));
            H(0, 1) = H(1, 0) = sym;
            d2x[m] = H;
        }
        Mat2 dy = dx_of_y(y).inverse();
        // inverse-function rule: D^2 y^i = - dy^i_m (dy)^T D^2 x^m (dy)
        std::array<Mat2, 2> out2;
        for (int i = 0; i < 2; ++i) {
            Mat2 acc = Mat2::Zero();
            for (int m = 0; m < 2; ++m) acc += dy(i, m) * (dy.transpose() * d2x[m] * dy);
            out2[i] = -acc;
        }
        return out2;
    };

    EquationData in = p.eq;
    out.data_y.A = [in, x_of_y, dx_of_y](Vec2 y) -> Mat2 {
        Mat2 dy = dx_of_y(y).inverse();
        return dy * in.A(x_of_y(y)) * dy.transpose();
    };
    out.data_y.b = [in, x_of_y, dx_of_y, d2y](Vec2 y) -> Vec2 {
        Vec2 x = x_of_y(y);
        Mat2 dy = dx_of_y(y).inverse();
        auto dd = d2y(y);
        Mat2 A = in.A(x);
        Vec2 bt = dy * in.b(x);
        return {bt.x() + (A * dd[0]).trace(), bt.y() + (A * dd[1]).trace()};
    };
    out.data_y.c = [in, x_of_y](Vec2 y) { return in.c(x_of_y(y)); };
    out.data_y.f = [in, x_of_y](Vec2 y) { return in.f(x_of_y(y)); };

    auto u_y = [u, x_of_y](Vec2 y) { return u(x_of_y(y)); };
    auto grad_u_y = [grad_u, x_of_y, dx_of_y](Vec2 y) -> Vec2 {
        return dx_of_y(y).transpose() * grad_u(x_of_y(y));
    };
    auto g1_y = [g1, x_of_y](Vec2 y) { return g1(x_of_y(y)); };

    // stage 3: boundary lift on the straightened (flat) domain
    out.y_domain = GraphDomain::flat();
    out.lift = std::make_shared<BoundaryLift>(out.y_domain, zeta, g1_y, std::min(rp, 1.0));
    auto lift = out.lift;
    out.u0_y = [u_y, lift](Vec2 y) { return u_y(y) - (*lift)(y); };
    out.grad_u0_y = [grad_u_y, lift](Vec2 y) -> Vec2 { return grad_u_y(y) - lift->gradient(y); };

    auto data_y = out.data_y;
    ScalarFn f0_y = [data_y, lift](Vec2 y) {
        Mat2 Hv = lift->hessian(y);
        Vec2 Dv = lift->gradient(y);
        double Lv = (data_y.A(y) * Hv).trace() + data_y.b(y).dot(Dv) + data_y.c(y) * (*lift)(y);
        return data_y.f(y) - Lv;
    };

    out.omega_f0 = assemble_omega_f0(dm, prob.dom.rho_dgamma(), rp);

    // stage 4: flatten by the regularized distance (trivial scaling map on
    // the already-flat straightened domain, kept for uniform bookkeeping)
    EquationData eq_y{data_y.A, data_y.b, data_y.c, f0_y};
    out.flat = flatten_by_distance(out.y_domain, zeta, {0.0, 0.0}, 0.5 * rp, eq_y, out.u0_y,
                                   out.grad_u0_y);

    out.provenance = nlohmann::json::array();
    auto log_stage = [&](const std::string& name, const nlohmann::json& info) {
        nlohmann::json j = info;
        j["stage"] = name;
        j["inputs_hash"] =
            fnv1a(name + std::to_string(rp) + std::to_string(x0.x()) + std::to_string(r));
        out.provenance.push_back(j);
    };
    log_stage("absorb_zeroth_order", {{"note", "g1 = g - beta0 u"}});
    log_stage("straightening_flow", {{"patch_radius", rp},
                                     {"flow_steps", st.flow_steps},
                                     {"radius_reduced", st.radius_reduced},
                                     {"orientation", st.orientation}});
    log_stage("boundary_lift", {{"b", out.lift->b()}});
    log_stage("flatten_by_distance", {{"s0", out.flat.s0}});
    return out;
}

}  // namespace dinireg
