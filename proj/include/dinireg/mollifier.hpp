#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "dinireg/common.hpp"

namespace dinireg {

/// Radial bump on the unit disk with unit mass: zeta(y) = c (1-|y|^2)^4,
/// c = 5/pi in two dimensions.  The quartic contact at the rim keeps the
/// convolution smooth enough for third-derivative differencing.  Quadrature
/// is Gauss-Legendre in radius crossed with a uniform (spectrally accurate)
/// angular rule; the defaults give at least 16 points per axis.
class MollifierSpec {
public:
    explicit MollifierSpec(int radial_order = 20, int angular_order = 48) {
        if (radial_order < 16 || angular_order < 16)
            throw invalid_input("MollifierSpec: need at least 16 quadrature points per axis");
        gauss_legendre_01(radial_order, r_, wr_);
        n_theta_ = angular_order;
        cs_.resize(n_theta_);
        sn_.resize(n_theta_);
        for (int j = 0; j < n_theta_; ++j) {
            double th = 2.0 * std::numbers::pi * j / n_theta_;
            cs_[j] = std::cos(th);
            sn_[j] = std::sin(th);
        }
    }

    double profile(double rho) const {
        if (rho >= 1.0) return 0.0;
        double w = 1.0 - rho * rho;
        return (5.0 / std::numbers::pi) * w * w * w * w;
    }

    /// Quadrature of the total mass; equals 1 to machine accuracy since the
    /// integrand is a polynomial well inside the rule's exactness degree.
    double normalization() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < r_.size(); ++i) acc += wr_[i] * r_[i] * profile(r_[i]);
        return acc * 2.0 * std::numbers::pi;
    }

    /// convolve(f, x, t) = integral over the unit disk of f(x - t y) zeta(y) dy.
    double convolve(const std::function<double(Vec2)>& f, Vec2 x, double t) const {
        double acc = 0.0;
        const double dth = 2.0 * std::numbers::pi / n_theta_;
        for (std::size_t i = 0; i < r_.size(); ++i) {
            const double w_i = wr_[i] * r_[i] * profile(r_[i]) * dth;
            const double tr = t * r_[i];
            double ring = 0.0;
            for (int j = 0; j < n_theta_; ++j)
                ring += f({x.x() - tr * cs_[j], x.y() - tr * sn_[j]});
            acc += w_i * ring;
        }
        return acc;
    }

    int radial_order() const { return static_cast<int>(r_.size()); }
    int angular_order() const { return n_theta_; }

private:
    // Gauss-Legendre nodes/weights mapped to [0,1], via Newton on the
    // Legendre recurrence.
    static void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
        x.resize(n);
        w.resize(n);
        for (int i = 0; i < n; ++i) {
            double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double p0 = 0.0, p1 = 0.0, dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = 0.0;
                for (int k = 0; k < n; ++k) {
                    double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
                }
                dp = n * (t * p0 - p1) / (t * t - 1.0);
                double dt = p0 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            x[i] = 0.5 * (1.0 - t);  // descending cos -> ascending node
            w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
        }
    }

    std::vector<double> r_, wr_, cs_, sn_;
    int n_theta_ = 0;
};

/// Mollified lift: Psi(t, x) = integral of psi0(x - t y) zeta(y) dy.  It is
/// Lipschitz in t with the same constant as psi0 and reduces to psi0 at
/// t = 0.
inline double mollified_lift(const std::function<double(Vec2)>& psi0, const MollifierSpec& zeta,
                             double t, Vec2 x) {
    if (t == 0.0) return psi0(x);
    return zeta.convolve(psi0, x, t);
}

}  // namespace dinireg
