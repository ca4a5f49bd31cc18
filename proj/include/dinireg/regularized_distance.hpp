#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "dinireg/graph_domain.hpp"
#include "dinireg/mollifier.hpp"

namespace dinireg {

/// Regularized distance: the unique fixed point t = Psi(t, x) / (2K) of the
/// mollified lift of the defining function.  The map contracts with factor
/// <= 1/2, psi is smooth inside the domain, comparable to the true distance
/// (delta K psi <= dist <= 3 K delta^{-1} psi), has |D psi| <= 1, and its
/// higher derivatives blow up no faster than psi^{1-m} rho_{D psi0}(psi).
class RegularizedDistance {
public:
    RegularizedDistance(GraphDomain dom, MollifierSpec zeta)
        : dom_(std::move(dom)), zeta_(std::move(zeta)) {}

    const GraphDomain& domain() const { return dom_; }
    const MollifierSpec& mollifier() const { return zeta_; }

    struct FixedPoint {
        double value = 0.0;
        int iterations = 0;
    };

    FixedPoint solve(Vec2 x, int max_iters = 60) const {
        const double K = dom_.lipschitz_K();
        const double psi0 = dom_.psi0(x);
        const double tol = 1e-12 * (1.0 + std::abs(psi0));
        auto lift = [&](Vec2 p) { return dom_.psi0(p); };
        double t = psi0 / (2.0 * K);
        FixedPoint fp;
        for (int k = 0; k < max_iters; ++k) {
            double next = mollified_lift(lift, zeta_, t, x) / (2.0 * K);
            ++fp.iterations;
            double gap = std::abs(next - t);
            t = next;
            if (gap <= tol) {
                fp.value = t;
                return fp;
            }
        }
        throw numeric_error("RegularizedDistance: fixed point failed to converge (check K)");
    }

    double operator()(Vec2 x) const { return solve(x).value; }

    // FD derivatives with Richardson extrapolation; step tied to the local
    // psi value so stencils stay inside the smooth region.
    Vec2 gradient(Vec2 x, double step = 0.0) const {
        const double h = fd_step(x, step);
        auto d = [&](Vec2 e) {
            auto central = [&](double hh) {
                return ((*this)(x + hh * e) - (*this)(x - hh * e)) / (2.0 * hh);
            };
            return (4.0 * central(h / 2) - central(h)) / 3.0;
        };
        return {d(Vec2{1, 0}), d(Vec2{0, 1})};
    }

    Mat2 hessian(Vec2 x, double step = 0.0) const {
        const double h = fd_step(x, step);
        auto val = [&](double a, double b) { return (*this)({x.x() + a, x.y() + b}); };
        auto dxx = [&](double hh) { return (val(hh, 0) - 2 * val(0, 0) + val(-hh, 0)) / (hh * hh); };
        auto dyy = [&](double hh) { return (val(0, hh) - 2 * val(0, 0) + val(0, -hh)) / (hh * hh); };
        auto dxy = [&](double hh) {
            return (val(hh, hh) - val(hh, -hh) - val(-hh, hh) + val(-hh, -hh)) / (4 * hh * hh);
        };
        Mat2 H;
        H(0, 0) = (4.0 * dxx(h / 2) - dxx(h)) / 3.0;
        H(1, 1) = (4.0 * dyy(h / 2) - dyy(h)) / 3.0;
        H(0, 1) = H(1, 0) = (4.0 * dxy(h / 2) - dxy(h)) / 3.0;
        return H;
    }

    /// Third partials (xxx, xxy, xyy, yyy) by differencing the Hessian.
    std::array<double, 4> third_derivatives(Vec2 x, double step = 0.0) const {
        const double h = fd_step(x, step);
        Mat2 hxp = hessian(x + Vec2{h, 0}, h), hxm = hessian(x - Vec2{h, 0}, h);
        Mat2 hyp = hessian(x + Vec2{0, h}, h), hym = hessian(x - Vec2{0, h}, h);
        double dxxx = (hxp(0, 0) - hxm(0, 0)) / (2 * h);
        double dxxy = (hyp(0, 0) - hym(0, 0)) / (2 * h);
        double dxyy = (hxp(1, 1) - hxm(1, 1)) / (2 * h);
        double dyyy = (hyp(1, 1) - hym(1, 1)) / (2 * h);
        return {dxxx, dxxy, dxyy, dyyy};
    }

private:
    double fd_step(Vec2 x, double requested) const {
        if (requested > 0.0) return requested;
        double psi = std::abs((*this)(x));
        return std::clamp(psi / 10.0, 1e-7, 5e-3);
    }

    GraphDomain dom_;
    MollifierSpec zeta_;
};

/// One row per sample point: derivative magnitudes next to the expected
/// growth rates, so the suprema act as empirical constants.
struct DistanceDerivativeRow {
    Vec2 point;
    double psi = 0.0, dist = 0.0;
    double grad_norm = 0.0;
    double hess_ratio = 0.0;   // |D^2 psi| * psi / rho(psi)
    double third_ratio = 0.0;  // |D^3 psi| * psi^2 / rho(psi)
    bool skipped = false;
};

struct DistanceDerivativeReport {
    std::vector<DistanceDerivativeRow> rows;
    double sup_grad = 0.0, sup_hess_ratio = 0.0, sup_third_ratio = 0.0;
    int skipped = 0;
};

inline DistanceDerivativeReport regularized_distance_derivative_report(
    const RegularizedDistance& psi, const std::vector<Vec2>& points, int max_order = 3) {
    DistanceDerivativeReport rep;
    const Modulus& rho = psi.domain().rho_dpsi0();
    for (Vec2 x : points) {
        DistanceDerivativeRow row;
        row.point = x;
        row.psi = psi(x);
        row.dist = psi.domain().distance_to_boundary(x);
        if (row.psi <= 0.0 || row.psi / 10.0 < 1e-9) {
            row.skipped = true;
            ++rep.skipped;
            rep.rows.push_back(row);
            continue;
        }
        row.grad_norm = psi.gradient(x).norm();
        double r = rho.clamped(row.psi);
        if (max_order >= 2 && r > 0.0) {
            Mat2 H = psi.hessian(x);
            row.hess_ratio = H.norm() * row.psi / r;
        }
        if (max_order >= 3 && r > 0.0) {
            auto t3 = psi.third_derivatives(x);
            double mag = 0.0;
            for (double v : t3) mag = std::max(mag, std::abs(v));
            row.third_ratio = mag * sqr(row.psi) / r;
        }
        rep.sup_grad = std::max(rep.sup_grad, row.grad_norm);
        rep.sup_hess_ratio = std::max(rep.sup_hess_ratio, row.hess_ratio);
        rep.sup_third_ratio = std::max(rep.sup_third_ratio, row.third_ratio);
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace dinireg
