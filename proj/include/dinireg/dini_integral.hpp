#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "dinireg/modulus.hpp"
#include "dinireg/quadrature.hpp"

namespace dinireg {

/// Result of an improper integral with a possible logarithmic singularity
/// at 0.  `divergent` dominates: when set, `value` is the partial sum at
/// truncation and carries no meaning beyond diagnostics.
struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool divergent = false;
};

enum class DiniClass { neither, dini, double_dini };

struct DiniReport {
    IntegralResult dini_integral;
    IntegralResult double_dini_integral;
    DiniClass classification = DiniClass::neither;
    double quadrature_error_estimate = 0.0;
};

namespace detail {

/// Integrate f(t)/t over dyadic shells [2^{-k-1}, 2^{-k}] down from `upper`
/// toward 0, in the log substitution t = e^{-s}.  Convergence is judged on
/// dyadically blocked shell sums: if the last blocks stop decaying the tail
/// is not summable and the integral is declared divergent.
///
/// weight_log: multiply the integrand by ln(1/t) (the iterated-Dini weight).
inline IntegralResult shell_integral(const std::function<double(double)>& w, double upper,
                                     bool weight_log, int k_max = 1020) {
    auto integrand_s = [&](double s) {
        double t = std::exp(-s);
        double v = w(t) ;
        return weight_log ? v * s : v;
    };

    IntegralResult out;
    const double s_up = -std::log(upper);

    // head piece [2^-k0, upper]
    int k0 = static_cast<int>(std::ceil(s_up / std::numbers::ln2 - 1e-12));
    double s_k0 = k0 * std::numbers::ln2;
    if (s_k0 > s_up + 1e-15) {
        double coarse = simpson(integrand_s, s_up, s_k0, 8);
        double fine = simpson(integrand_s, s_up, s_k0, 16);
        out.value += fine;
        out.error_estimate += std::abs(fine - coarse) / 15.0;
    }

    std::vector<double> shells;
    shells.reserve(256);
    double shell_floor = 1e-15;
    for (int k = k0; k < k_max; ++k) {
        double s_lo = k * std::numbers::ln2;
        double s_hi = (k + 1) * std::numbers::ln2;
        double coarse = simpson(integrand_s, s_lo, s_hi, 8);
        double fine = simpson(integrand_s, s_lo, s_hi, 16);
        shells.push_back(fine);
        out.value += fine;
        out.error_estimate += std::abs(fine - coarse) / 15.0;
        if (fine < shell_floor * (1.0 + std::abs(out.value))) break;  // tail negligible
    }

    // block sums over dyadic index ranges [2^m - 1, 2^{m+1} - 1)
    std::vector<double> blocks;
    for (std::size_t lo = 0; lo < shells.size();) {
        std::size_t hi = std::min(2 * lo + 1, shells.size());
        double b = 0.0;
        for (std::size_t i = lo; i < hi; ++i) b += shells[i];
        blocks.push_back(b);
        lo = hi;
    }

    // divergence: the last three complete block ratios all above 3/4 with
    // non-negligible mass
    if (blocks.size() >= 4) {
        std::size_t m = blocks.size() - 1;
        bool stalled = true;
        for (std::size_t j = m; j > m - 3; --j) {
            bool high = blocks[j] > 0.75 * blocks[j - 1] &&
                        blocks[j] > 1e-9 * (1.0 + std::abs(out.value));
            stalled = stalled && high;
        }
        if (stalled) {
            out.divergent = true;
            return out;
        }
    }

    // tail estimate from the measured block decay ratio
    if (blocks.size() >= 2) {
        double rho = blocks.back() / std::max(blocks[blocks.size() - 2], 1e-300);
        rho = std::clamp(rho, 0.0, 0.95);
        out.error_estimate += blocks.back() * rho / (1.0 - rho);
    }
    return out;
}

}  // namespace detail

/// Quadrature estimate of the Dini integral of w over [lower, upper]
/// (integrand w(t)/t).  lower = 0 engages dyadic-shell summation with
/// divergence detection; positive lower uses adaptive quadrature in the
/// log variable.
inline IntegralResult dini_integral(const Modulus& w, double lower, double upper) {
    if (!(lower >= 0.0) || !(lower < upper))
        throw invalid_input("dini_integral: need 0 <= lower < upper");
    if (upper > w.right_end() * (1.0 + 1e-12))
        throw invalid_input("dini_integral: upper end exceeds modulus domain");
    upper = std::min(upper, w.right_end());
    auto eval = [&](double t) { return w(t); };
    if (lower > 0.0) {
        IntegralResult out;
        auto g = [&](double s) { return eval(std::exp(-s)); };
        out.value = adaptive_simpson(g, -std::log(upper), -std::log(lower), 1e-12, 40,
                                     &out.error_estimate);
        return out;
    }
    return detail::shell_integral(eval, upper, /*weight_log=*/false);
}

/// Same but for the iterated (double-Dini) integrand w(t) ln(1/t) / t,
/// always over (0, upper] with upper <= 1.
inline IntegralResult double_dini_integral(const Modulus& w, double upper) {
    if (!(upper > 0.0) || upper > 1.0)
        throw invalid_input("double_dini_integral: need upper in (0, 1]");
    upper = std::min(upper, w.right_end());
    auto eval = [&](double t) { return w(t); };
    return detail::shell_integral(eval, upper, /*weight_log=*/true);
}

/// Classify a modulus by its Dini and double-Dini integrals over
/// (0, min(a,1)].  Divergence flags dominate.
inline DiniReport classify(const Modulus& w) {
    DiniReport rep;
    double upper = std::min(w.right_end(), 1.0);
    rep.dini_integral = dini_integral(w, 0.0, upper);
    rep.double_dini_integral = double_dini_integral(w, upper);
    if (rep.dini_integral.divergent) {
        rep.classification = DiniClass::neither;
        // an unsummable Dini tail forces the weighted tail to diverge too
        rep.double_dini_integral.divergent = true;
    } else if (rep.double_dini_integral.divergent) {
        rep.classification = DiniClass::dini;
    } else {
        rep.classification = DiniClass::double_dini;
    }
    rep.quadrature_error_estimate =
        rep.dini_integral.error_estimate + rep.double_dini_integral.error_estimate;
    return rep;
}

inline const char* to_string(DiniClass c) {
    switch (c) {
        case DiniClass::neither: return "neither";
        case DiniClass::dini: return "dini";
        case DiniClass::double_dini: return "double_dini";
    }
    return "?";
}

}  // namespace dinireg
