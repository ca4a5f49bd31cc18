#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "dinireg/modulus.hpp"
#include "dinireg/quadrature.hpp"

namespace dinireg {

namespace detail {

/// Exact sup of (t/s)^beta * (c + d s) over s in [lo, hi] (one linear piece
/// of a table modulus).  The scaled piece has at most one interior critical
/// point, so endpoints plus that point cover the sup.
inline double linear_piece_sup(double t_beta, double beta, double c, double d, double lo,
                               double hi) {
    auto val = [&](double s) { return t_beta * (c + d * s) / std::pow(s, beta); };
    double best = std::max(val(lo), val(hi));
    if (d != 0.0 && beta < 1.0) {
        double s_star = beta * c / (d * (1.0 - beta));
        if (s_star > lo && s_star < hi) best = std::max(best, val(s_star));
    }
    return best;
}

struct SuffixGrid {
    std::vector<double> s;     // decreasing? -> stored increasing
    std::vector<double> suff;  // suffix max of w(s)/s^beta from s upward
};

inline std::shared_ptr<SuffixGrid> build_suffix_grid(const Modulus& w, double beta, int n) {
    auto g = std::make_shared<SuffixGrid>();
    g->s.resize(n);
    g->suff.resize(n);
    const double a = w.right_end();
    const double s_min = a * 1e-12;
    for (int i = 0; i < n; ++i)
        g->s[i] = s_min * std::pow(a / s_min, static_cast<double>(i) / (n - 1));
    double run = -1.0;
    for (int i = n - 1; i >= 0; --i) {
        run = std::max(run, w(g->s[i]) / std::pow(g->s[i], beta));
        g->suff[i] = run;
    }
    return g;
}

}  // namespace detail

/// Majorant construction: given w with w(0)=0 nondecreasing and a doubling
/// bound, returns w~(t) = sup_{s in [t,a]} (t/s)^beta w(s).  Then
/// w <= w~ pointwise and t^{-beta} w~(t) is nonincreasing, while the (double)
/// Dini class and the doubling property are preserved.
///
/// Closed forms are handled analytically: the scaled profile w(s)/s^beta is
/// monotone or has a single interior minimum, so the sup sits at an
/// endpoint.  Tables are handled piecewise-exactly; derived moduli fall back
/// to a dense suffix grid with local refinement.
inline Modulus majorant_beta(const Modulus& w, double beta) {
    if (!(beta > 0.0) || beta > 1.0)
        throw invalid_input("majorant_beta: beta must lie in (0, 1]");
    const double a = w.right_end();

    switch (w.kind()) {
        case Modulus::Kind::zero:
            return Modulus::zero(a);
        case Modulus::Kind::power: {
            const double alpha = w.power_exponent(), c = w.coefficient();
            if (beta >= alpha) return w;  // scaled profile nonincreasing: sup at s = t
            return Modulus::power(beta, c * std::pow(a, alpha - beta), a);
        }
        case Modulus::Kind::log_power:
        case Modulus::Kind::power_log: {
            // sup = max of the endpoint values
            Modulus cw = w;
            const double end_ratio = cw(a) / std::pow(a, beta);
            return Modulus::derived(
                [cw, beta, end_ratio](double t) {
                    return std::max(cw(t), std::pow(t, beta) * end_ratio);
                },
                a, "majorant");
        }
        case Modulus::Kind::table: {
            Modulus cw = w;
            return Modulus::derived(
                [cw, beta](double t) {
                    const auto& ts = cw.table_t();
                    const auto& vs = cw.table_w();
                    const double t_beta = std::pow(t, beta);
                    double best = cw(t);  // s = t endpoint
                    for (std::size_t i = 1; i < ts.size(); ++i) {
                        if (ts[i] <= t) continue;
                        double lo = std::max(ts[i - 1], t);
                        if (lo >= ts[i]) continue;
                        double d = (vs[i] - vs[i - 1]) / (ts[i] - ts[i - 1]);
                        double c = vs[i - 1] - d * ts[i - 1];
                        best = std::max(best,
                                        detail::linear_piece_sup(t_beta, beta, c, d, lo, ts[i]));
                    }
                    return best;
                },
                cw.right_end(), "majorant");
        }
        case Modulus::Kind::derived: {
            Modulus cw = w;
            auto grid = detail::build_suffix_grid(cw, beta, 4096);
            return Modulus::derived(
                [cw, beta, grid](double t) {
                    const double t_beta = std::pow(t, beta);
                    double best = cw(t) ;
                    // first grid node >= t
                    auto it = std::lower_bound(grid->s.begin(), grid->s.end(), t);
                    if (it != grid->s.end()) {
                        std::size_t j = static_cast<std::size_t>(it - grid->s.begin());
                        best = std::max(best, t_beta * grid->suff[j]);
                        // refine the gap [t, s_j]
                        if (grid->s[j] > t) {
                            auto [arg, val] = golden_max(
                                [&](double s) { return cw(s) / std::pow(s, beta); }, t,
                                grid->s[j], 40);
                            (void)arg;
                            best = std::max(best, t_beta * val);
                        }
                    }
                    return best;
                },
                cw.right_end(), "majorant");
        }
    }
    return w;
}

}  // namespace dinireg
