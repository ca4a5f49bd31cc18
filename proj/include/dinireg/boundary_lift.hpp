#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "dinireg/dini_extension.hpp"
#include "dinireg/dini_integral.hpp"
#include "dinireg/quadrature.hpp"

namespace dinireg {

/// Vertical antiderivative lift of boundary data: with g~ the
/// interior-smooth extension of g,
///     v(x) = -int_{x2}^{b} g~(x1, t) dt,
/// so D_n v = g on the boundary by construction.  Carries FD evaluators and
/// the empirical-constant report for the derivative growth bounds.
class BoundaryLift {
public:
    BoundaryLift(const GraphDomain& dom, const MollifierSpec& zeta,
                 std::function<double(Vec2)> g, double b)
        : dom_(dom), b_(b) {
        if (!(b > 0.0) || b > dom.patch_halfwidth())
            throw invalid_input("BoundaryLift: b must lie in (0, patch half-width]");
        psi_ = std::make_shared<RegularizedDistance>(dom, zeta);
        g_ext_ = std::make_shared<DiniExtension>(psi_, std::move(g));
    }

    double b() const { return b_; }
    const DiniExtension& extended_data() const { return *g_ext_; }

    double operator()(Vec2 x) const {
        auto integrand = [&](double t) { return (*g_ext_)({x.x(), t}); };
        return -simpson(integrand, x.y(), b_, quad_panels_);
    }

    /// D_n v = g~ exactly (fundamental theorem of calculus).
    double vertical_derivative(Vec2 x) const { return (*g_ext_)(x); }

    Vec2 gradient(Vec2 x, double h = 1e-5) const {
        double dx = ((*this)({x.x() + h, x.y()}) - (*this)({x.x() - h, x.y()})) / (2 * h);
        return {dx, vertical_derivative(x)};
    }

    Mat2 hessian(Vec2 x, double h = 1e-4) const {
        Mat2 H;
        H(0, 0) = ((*this)({x.x() + h, x.y()}) - 2 * (*this)(x) + (*this)({x.x() - h, x.y()})) /
                  (h * h);
        Vec2 gp = g_ext_->gradient({x.x(), x.y()}, h);
        H(0, 1) = H(1, 0) = gp.x();  // D_1 D_n v = D_1 g~
        H(1, 1) = gp.y();            // D_n D_n v = D_n g~
        return H;
    }

    /// Third-derivative magnitude proxy: largest third partial reachable by
    /// differencing the available second derivatives.
    double third_derivative_mag(Vec2 x, double h = 1e-4) const {
        Mat2 hyp = hessian(x + Vec2{0, h}, h), hym = hessian(x - Vec2{0, h}, h);
        Mat2 hxp = hessian(x + Vec2{h, 0}, h), hxm = hessian(x - Vec2{h, 0}, h);
        return std::max((hyp - hym).norm(), (hxp - hxm).norm()) / (2 * h);
    }

private:
    GraphDomain dom_;
    double b_;
    std::shared_ptr<RegularizedDistance> psi_;
    std::shared_ptr<DiniExtension> g_ext_;
    int quad_panels_ = 48;
};

/// Derivative-bound ratios of the lift: |v|_1 against |g|_1, [v]_2 against
/// |g|_1 plus the Dini tails of the data and graph moduli, third-derivative
/// growth, and the second-derivative modulus against its integral bound.
struct BoundaryLiftReport {
    double trace_error = 0.0;       // sup |D_n v - g| on boundary samples
    double c1_ratio = 0.0;          // |v|_1 / |g|_1
    double c2_ratio = 0.0;          // [v]_2 / (|g|_1 + tails)
    double third_ratio = 0.0;       // sup |D^3 v| d / (rho_Dg(d) + rho_Dgamma(d))
    double d2_modulus_ratio = 0.0;  // sup osc D^2 v / integral bound
};

inline BoundaryLiftReport boundary_lift_report(const BoundaryLift& v, const GraphDomain& dom,
                                               const std::function<double(Vec2)>& g,
                                               double g_c1, const Modulus& rho_dg,
                                               int n_samples = 6) {
    BoundaryLiftReport rep;
    const double b = v.b();
    const double hw = 0.45 * b;

    for (int i = 0; i <= 8; ++i) {
        double s = -hw + 2.0 * hw * i / 8.0;
        Vec2 xb = dom.boundary_point(s);
        rep.trace_error = std::max(rep.trace_error, std::abs(v.vertical_derivative(xb) - g(xb)));
    }

    double v1 = 0.0, v2 = 0.0;
    std::vector<Vec2> pts;
    for (int i = 0; i < n_samples; ++i)
        for (int j = 1; j <= n_samples; ++j) {
            Vec2 x{-hw + 2.0 * hw * i / (n_samples - 1),
                   dom.gamma(-hw + 2.0 * hw * i / (n_samples - 1)) + 0.8 * b * j / n_samples};
            if (x.y() > b) continue;
            pts.push_back(x);
            v1 = std::max({v1, std::abs(v(x)), v.gradient(x).norm()});
            v2 = std::max(v2, v.hessian(x).norm());
        }

    double tail = dini_integral(rho_dg, 1e-9, rho_dg.right_end()).value +
                  dini_integral(dom.rho_dgamma(), 1e-9, dom.rho_dgamma().right_end()).value;
    rep.c1_ratio = v1 / std::max(g_c1, 1e-12);
    rep.c2_ratio = v2 / std::max(g_c1 + tail, 1e-12);

    for (Vec2 x : pts) {
        double d = dom.distance_to_boundary(x);
        if (d < 5e-3) continue;
        double denom = rho_dg.clamped(d) + dom.rho_dpsi0().clamped(d);
        if (denom <= 0.0) continue;
        rep.third_ratio = std::max(rep.third_ratio, v.third_derivative_mag(x) * d / denom);
    }

    // second-derivative modulus against the cumulative Dini bound
    for (std::size_t a = 0; a < pts.size(); a += 2)
        for (std::size_t c = a + 1; c < pts.size(); c += 2) {
            double d = (pts[a] - pts[c]).norm();
            if (d < 1e-3) continue;
            double osc = (v.hessian(pts[a]) - v.hessian(pts[c])).norm();
            double bound = dini_integral(rho_dg, 1e-9, std::min(d, rho_dg.right_end())).value +
                           dini_integral(dom.rho_dgamma(), 1e-9,
                                         std::min(d, dom.rho_dgamma().right_end()))
                               .value;
            if (bound > 1e-12)
                rep.d2_modulus_ratio = std::max(rep.d2_modulus_ratio, osc / bound);
        }
    return rep;
}

}  // namespace dinireg
