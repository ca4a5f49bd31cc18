#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>

#include "dinireg/regularized_distance.hpp"

namespace dinireg {

/// Interior-smooth extension that keeps boundary values: lift the data
/// through the mollifier at a pace set by the regularized distance,
///     ext(x) = U(delta * psi(x), x),  U(t, x) = (u * zeta_t)(x).
/// On the boundary psi = 0 and ext = u; inside, derivatives of order m
/// grow no faster than d^{1-m} (rho_{Du}(d) + rho_{D psi0}(c d)).
///
/// The input u must be evaluable on a neighborhood of the closed domain;
/// grid-backed inputs extend by nearest value.
class DiniExtension {
public:
    DiniExtension(std::shared_ptr<const RegularizedDistance> psi,
                  std::function<double(Vec2)> u, double delta = 0.0)
        : psi_(std::move(psi)), u_(std::move(u)) {
        delta_ = delta > 0.0 ? delta : psi_->domain().comparability_delta();
    }

    DiniExtension(const GraphDomain& dom, const MollifierSpec& zeta,
                  std::function<double(Vec2)> u, double delta = 0.0)
        : DiniExtension(std::make_shared<RegularizedDistance>(dom, zeta), std::move(u), delta) {}

    double delta() const { return delta_; }
    const RegularizedDistance& psi() const { return *psi_; }

    double operator()(Vec2 x) const {
        const double t = delta_ * (*psi_)(x);
        if (t <= 0.0) return u_(x);  // boundary and exterior: point values
        return psi_->mollifier().convolve(u_, x, t);
    }

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

private:
    double fd_step(Vec2 x, double requested) const {
        if (requested > 0.0) return requested;
        double d = std::abs((*psi_)(x));
        return std::clamp(d / 10.0, 1e-7, 5e-3);
    }

    std::shared_ptr<const RegularizedDistance> psi_;
    std::function<double(Vec2)> u_;
    double delta_ = 0.0;
};

/// Convenience wrapper matching the operation signature.
inline DiniExtension dini_extension(const GraphDomain& dom, const MollifierSpec& zeta,
                                    std::function<double(Vec2)> u, double delta = 0.0) {
    return DiniExtension(dom, zeta, std::move(u), delta);
}

}  // namespace dinireg
