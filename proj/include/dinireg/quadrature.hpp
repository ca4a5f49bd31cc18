#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>

#include "dinireg/common.hpp"

namespace dinireg {

/// Composite Simpson on [a,b] with n panels (n rounded up to even).
template <class F>
double simpson(F&& f, double a, double b, int n) {
    if (a == b) return 0.0;
    if (n < 2) n = 2;
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s4 = 0.0, s2 = 0.0;
    for (int i = 1; i < n; i += 2) s4 += f(a + i * h);
    for (int i = 2; i < n; i += 2) s2 += f(a + i * h);
    return (h / 3.0) * (f(a) + f(b) + 4.0 * s4 + 2.0 * s2);
}

namespace detail {

template <class F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double eps, int depth, double* err_acc) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double refined = left + right;
    const double delta = refined - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
        if (err_acc) *err_acc += std::abs(delta) / 15.0;
        return refined + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1, err_acc) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1, err_acc);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction. err_estimate (optional)
/// accumulates the local extrapolation residuals.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12, int max_depth = 40,
                        double* err_estimate = nullptr) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    if (err_estimate) *err_estimate = 0.0;
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, err_estimate);
}

/// Golden-section maximization of f on [a,b]; returns (argmax, max).
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, int iters = 60) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

/// Golden-section minimization of f on [a,b]; returns (argmin, min).
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, int iters = 60) {
    auto [x, v] = golden_max([&](double t) { return -f(t); }, a, b, iters);
    return {x, -v};
}

}  // namespace dinireg
