#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "dinireg/diffeo.hpp"
#include "dinireg/dini_extension.hpp"

namespace dinireg {

/// Oblique boundary field: zeroth-order weight, direction field, and the
/// non-tangency constant mu0 with |beta . nu| >= mu0 |beta| on the boundary.
struct ObliqueField {
    std::function<double(Vec2)> beta0;
    std::function<Vec2(Vec2)> beta;
    double mu0 = 0.5;
    double beta_c1 = 1.0;   // |beta|_1 characteristic
    Modulus rho_dbeta;      // modulus of the direction field gradient
};

/// Coordinates straightening an oblique direction into the vertical: seeds
/// on the boundary graph, flow time equal to the second coordinate,
///     x(y1, y2) = flow of dx/dt = beta(x) from (x01 + y1, gamma(x01 + y1)).
/// On the boundary dx/dy2 = beta exactly; the map is as smooth as the
/// interior-extended field allows.
struct StraighteningResult {
    DiffeoMap map;  // forward: x -> y, inverse: y -> x
    double patch_radius = 0.0;  // half-width actually used in y1
    double tau_exit = 0.0;      // flow time to leave the patch
    bool radius_reduced = false;
    int flow_steps = 0;
    double orientation = 1.0;  // +1 if beta already points inward
    std::function<Mat2(Vec2)> flow_jacobian;  // D_y x along the flow, at y
};

namespace detail {

/// RK4 for state (x, J) with dx/dt = b(x), dJ/dt = Db(x) J.
struct FlowState {
    Vec2 x;
    Mat2 J;
};

template <class Field, class FieldJac>
inline FlowState integrate_flow(const Field& b, const FieldJac& db, FlowState s, double T,
                                int steps) {
    const double h = T / steps;
    auto rhs = [&](const FlowState& st) -> FlowState {
        return {b(st.x), db(st.x) * st.J};
    };
    for (int k = 0; k < steps; ++k) {
        FlowState k1 = rhs(s);
        FlowState k2 = rhs({s.x + 0.5 * h * k1.x, s.J + 0.5 * h * k1.J});
        FlowState k3 = rhs({s.x + 0.5 * h * k2.x, s.J + 0.5 * h * k2.J});
        FlowState k4 = rhs({s.x + h * k3.x, s.J + h * k3.J});
        s.x += (h / 6.0) * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        s.J += (h / 6.0) * (k1.J + 2 * k2.J + 2 * k3.J + k4.J);
    }
    return s;
}

}  // namespace detail

inline StraighteningResult straightening_flow(const ObliqueField& field, const GraphDomain& dom,
                                              const MollifierSpec& zeta, Vec2 x0, double r) {
    if (std::abs(dom.psi0(x0)) > 1e-10)
        throw invalid_input("straightening_flow: x0 must lie on the boundary");

    // obliqueness scan over the seed range
    double orientation = 0.0;
    for (int i = 0; i <= 40; ++i) {
        double s = x0.x() - r + 2.0 * r * i / 40.0;
        Vec2 nb = dom.outward_normal(s);
        Vec2 bv = field.beta(dom.boundary_point(s));
        if (bv.norm() <= 0.0 || std::abs(bv.dot(nb)) < field.mu0 * bv.norm() * (1.0 - 1e-9))
            throw invalid_input("straightening_flow: obliqueness violated, construction refused");
        double sgn = bv.dot(nb) > 0.0 ? -1.0 : 1.0;  // flip so the flow enters the domain
        if (orientation == 0.0) orientation = sgn;
        if (orientation != sgn)
            throw invalid_input("straightening_flow: direction field changes side");
    }

    // interior-smooth extension of each component
    auto psi = std::make_shared<RegularizedDistance>(dom, zeta);
    auto ext1 = std::make_shared<DiniExtension>(psi, [f = field.beta](Vec2 p) { return f(p).x(); });
    auto ext2 = std::make_shared<DiniExtension>(psi, [f = field.beta](Vec2 p) { return f(p).y(); });
    auto bdir = [ext1, ext2, orientation](Vec2 p) -> Vec2 {
        return orientation * Vec2{(*ext1)(p), (*ext2)(p)};
    };
    auto bjac = [bdir](Vec2 p) -> Mat2 {
        const double h = 1e-5;
        Mat2 J;
        Vec2 dx = (bdir(p + Vec2{h, 0}) - bdir(p - Vec2{h, 0})) / (2 * h);
        Vec2 dy = (bdir(p + Vec2{0, h}) - bdir(p - Vec2{0, h})) / (2 * h);
        J << dx.x(), dy.x(), dx.y(), dy.y();
        return J;
    };

    GraphDomain dom_c = dom;
    auto seed = [dom_c, x0](double y1) { return dom_c.boundary_point(x0.x() + y1); };
    auto seed_tangent = [dom_c, x0](double y1) -> Vec2 {
        return {1.0, dom_c.dgamma(x0.x() + y1)};
    };

    StraighteningResult out;
    out.orientation = orientation;

    // base step count: halve until the Jacobian-based round trip at a
    // representative point moves less than 1e-8
    int steps = 8;
    {
        auto probe = [&](int n) {
            detail::FlowState s{seed(0.3 * r), Mat2::Identity()};
            return detail::integrate_flow(bdir, bjac, s, 0.5 * r, n).x;
        };
        Vec2 prev = probe(steps);
        for (int halvings = 0; halvings < 10; ++halvings) {
            Vec2 cur = probe(steps * 2);
            if ((cur - prev).norm() < 0.5e-8) break;
            steps *= 2;
            prev = cur;
        }
    }
    out.flow_steps = steps;

    // shrink the seed half-width until flows of duration r stay in the patch
    double rp = r;
    auto stays = [&](double cand) {
        for (int i = 0; i <= 8; ++i) {
            double y1 = -cand + 2.0 * cand * i / 8.0;
            detail::FlowState s{seed(y1), Mat2::Identity()};
            auto end = detail::integrate_flow(bdir, bjac, s, cand, steps);
            if ((end.x - x0).norm() > 2.0 * r) return false;
        }
        return true;
    };
    while (!stays(rp) && rp > 0.05 * r) {
        rp *= 0.8;
        out.radius_reduced = true;
    }
    out.patch_radius = rp;
    out.tau_exit = rp;

    const double steps_per_unit = steps / (0.5 * r);
    auto flow_from = [bdir, bjac, seed, seed_tangent, steps_per_unit](Vec2 y) -> detail::FlowState {
        Mat2 J0;
        Vec2 tan = seed_tangent(y.x());
        Vec2 b0 = bdir(seed(y.x()));
        J0 << tan.x(), b0.x(), tan.y(), b0.y();
        detail::FlowState s{seed(y.x()), J0};
        if (std::abs(y.y()) < 1e-300) return s;
        int n = std::max(4, static_cast<int>(std::ceil(steps_per_unit * std::abs(y.y()))));
        return detail::integrate_flow(bdir, bjac, s, y.y(), n);
    };

    auto inverse = [flow_from](Vec2 y) { return flow_from(y).x; };
    auto flow_jacobian = [flow_from](Vec2 y) { return flow_from(y).J; };

    // forward map by damped Newton on x(y) = x_target
    auto forward = [flow_from, x0, rp](Vec2 x) -> Vec2 {
        Vec2 y{x.x() - x0.x(), 0.0};
        for (int it = 0; it < 60; ++it) {
            detail::FlowState s = flow_from(y);
            Vec2 res = s.x - x;
            if (res.norm() < 1e-11) break;
            Vec2 dy = s.J.inverse() * res;
            double damp = 1.0;
            if (dy.norm() > 0.25 * rp) damp = 0.25 * rp / dy.norm();
            y -= damp * dy;
        }
        return y;
    };

    out.map.inverse = inverse;
    out.map.forward = forward;
    out.flow_jacobian = flow_jacobian;
    // jacobian of the forward map at x: inverse of the flow jacobian
    out.map.jacobian = [forward, flow_jacobian](Vec2 x) -> Mat2 {
        return flow_jacobian(forward(x)).inverse();
    };
    out.map.validity = {{x0.x() - rp, x0.y() - rp}, {x0.x() + rp, x0.y() + rp}};
    return out;
}

/// Ratio report for the flow-map second derivatives: the envelope bound
/// predicts |x''(y)| <= N (tau - t)^{-1} (rho_{D beta} + rho_{D psi0})(tau - t).
struct FlowSecondDerivativeReport {
    double sup_second = 0.0;
    double sup_ratio = 0.0;
};

inline FlowSecondDerivativeReport straightening_second_derivative_report(
    const StraighteningResult& st, const ObliqueField& field, const GraphDomain& dom,
    int n_samples = 7) {
    FlowSecondDerivativeReport rep;
    const double rp = st.patch_radius;
    for (int i = 0; i < n_samples; ++i)
        for (int j = 1; j < n_samples; ++j) {
            Vec2 y{-0.5 * rp + rp * i / (n_samples - 1), 0.8 * rp * j / n_samples};
            double h = 1e-4 * rp;
            Mat2 jyp = st.flow_jacobian(y + Vec2{0, h}), jym = st.flow_jacobian(y - Vec2{0, h});
            Mat2 jxp = st.flow_jacobian(y + Vec2{h, 0}), jxm = st.flow_jacobian(y - Vec2{h, 0});
            double second = std::max((jyp - jym).norm(), (jxp - jxm).norm()) / (2 * h);
            rep.sup_second = std::max(rep.sup_second, second);
            double gap = st.tau_exit - y.y();
            double denom =
                (field.rho_dbeta.clamped(gap) + dom.rho_dpsi0().clamped(gap)) / gap;
            if (denom > 0.0) rep.sup_ratio = std::max(rep.sup_ratio, second / denom);
        }
    return rep;
}

}  // namespace dinireg
