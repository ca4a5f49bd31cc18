#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dinireg/fem_conormal.hpp"
#include "dinireg/modulus.hpp"

namespace dinireg {

/// Nelder-Mead over a few coordinates, followed by a coordinate-wise
/// golden-section polish.  Deterministic given the seed points; good enough
/// for the low-dimensional non-convex p-mean objectives used here.
inline std::vector<double> simplex_minimize(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> seed,
    double spread, int max_iter = 400) {
    const int n = static_cast<int>(seed.size());
    std::vector<std::vector<double>> x(n + 1, seed);
    for (int i = 0; i < n; ++i) x[i + 1][i] += (spread > 0 ? spread : 1.0);
    std::vector<double> fx(n + 1);
    for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

    auto order = [&]() {
        std::vector<int> idx(n + 1);
        for (int i = 0; i <= n; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        return idx;
    };

    for (int it = 0; it < max_iter; ++it) {
        auto idx = order();
        if (std::abs(fx[idx[n]] - fx[idx[0]]) <= 1e-14 * (1.0 + std::abs(fx[idx[0]]))) break;
        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < n; ++d) centroid[d] += x[idx[i]][d] / n;
        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (int d = 0; d < n; ++d)
                p[d] = centroid[d] + coef * (centroid[d] - x[idx[n]][d]);
            return p;
        };
        auto xr = blend(1.0);
        double fr = f(xr);
        if (fr < fx[idx[0]]) {
            auto xe = blend(2.0);
            double fe = f(xe);
            if (fe < fr) {
                x[idx[n]] = xe;
                fx[idx[n]] = fe;
            } else {
                x[idx[n]] = xr;
                fx[idx[n]] = fr;
            }
        } else if (fr < fx[idx[n - 1]]) {
            x[idx[n]] = xr;
            fx[idx[n]] = fr;
        } else {
            auto xc = blend(-0.5);
            double fc = f(xc);
            if (fc < fx[idx[n]]) {
                x[idx[n]] = xc;
                fx[idx[n]] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int d = 0; d < n; ++d)
                        x[idx[i]][d] = 0.5 * (x[idx[i]][d] + x[idx[0]][d]);
                    fx[idx[i]] = f(x[idx[i]]);
                }
            }
        }
    }
    auto idx = order();
    std::vector<double> best = x[idx[0]];
    // coordinate-wise golden polish
    for (int d = 0; d < n; ++d) {
        double w = std::max(spread * 0.5, 1e-6);
        auto g1 = [&](double v) {
            auto p = best;
            p[d] = v;
            return f(p);
        };
        auto [arg, val] = golden_min(g1, best[d] - w, best[d] + w, 48);
        if (val <= f(best)) best[d] = arg;
    }
    return best;
}

enum class ExcessMode { gradient, hessian };

/// Campanato-type excess: the best p-mean distance of Du (or D^2 u) from a
/// constant over the ball nodes,
///   phi(x, r) = inf_q ( mean_{B(x,r)} |D u - q|^p )^{1/p}.
/// The inf is approximated by simplex search seeded at the componentwise
/// median and mean.
inline double excess(const DiscreteSolution& u, Vec2 xbar, double r, double p, ExcessMode mode,
                     int min_nodes = 50) {
    const GridSpec& g = u.u.grid();
    std::vector<Vec2> grads;
    std::vector<Mat2> hessians;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!u.node_active(i, j)) continue;
            if ((g.node(i, j) - xbar).norm() > r) continue;
            if (mode == ExcessMode::gradient)
                grads.push_back(u.u.gradient_at(i, j));
            else
                hessians.push_back(u.u.hessian_at(i, j));
        }
    const std::size_t n =
        mode == ExcessMode::gradient ? grads.size() : hessians.size();
    if (static_cast<int>(n) < min_nodes)
        throw numeric_error("excess: too few sample nodes in the ball");

    const int dim = mode == ExcessMode::gradient ? 2 : 3;
    auto component = [&](std::size_t k, int d) -> double {
        if (mode == ExcessMode::gradient) return d == 0 ? grads[k].x() : grads[k].y();
        return d == 0 ? hessians[k](0, 0) : (d == 1 ? hessians[k](0, 1) : hessians[k](1, 1));
    };
    auto objective = [&](const std::vector<double>& q) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double s = 0.0;
            for (int d = 0; d < dim; ++d) s += sqr(component(k, d) - q[d]);
            // off-diagonal entry appears twice in the matrix norm
            if (mode == ExcessMode::hessian) s += sqr(component(k, 1) - q[1]);
            acc += std::pow(s, 0.5 * p);
        }
        return std::pow(acc / n, 1.0 / p);
    };

    std::vector<double> mean(dim, 0.0), median(dim, 0.0);
    for (int d = 0; d < dim; ++d) {
        std::vector<double> vals(n);
        for (std::size_t k = 0; k < n; ++k) vals[k] = component(k, d);
        for (double v : vals) mean[d] += v / n;
        std::nth_element(vals.begin(), vals.begin() + n / 2, vals.end());
        median[d] = vals[n / 2];
    }
    double spread = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (int d = 0; d < dim; ++d) spread = std::max(spread, std::abs(component(k, d) - mean[d]));
    spread = std::max(spread * 0.5, 1e-9);

    auto q1 = simplex_minimize(objective, median, spread);
    auto q2 = simplex_minimize(objective, mean, spread);
    return std::min(objective(q1), objective(q2));
}

/// Dyadic excess table at one center with a fitted decay exponent.
struct ExcessTable {
    Vec2 center;
    double p = 0.5, kappa = 0.25;
    ExcessMode mode = ExcessMode::gradient;
    std::vector<double> radii;
    std::vector<double> phi;
    double fitted_exponent = 0.0;
    double exponent_stderr = 0.0;
    int usable_steps = 0;
};

/// Per-step check of the one-step decay inequality
///   phi(kappa r) <= 4^{(1-p)/p} C0 kappa phi(r)
///                   + C (kappa^{-n/p} + 1) (omega_A(2r) |Du|_inf + omega_g(2r)).
struct DecayStepCheck {
    double r = 0.0, phi_r = 0.0, phi_kr = 0.0, osc_term = 0.0;
    double c0_candidate = 0.0;  // phi(kr) / (4^{(1-p)/p} kappa phi(r))
};

struct DecayStudy {
    std::vector<ExcessTable> tables;
    std::vector<std::vector<DecayStepCheck>> steps;  // per center
    double fitted_C0 = 0.0;
    double fitted_C = 0.0;
    double grid_floor = 0.0;
};

inline ExcessTable excess_table(const DiscreteSolution& u, Vec2 center, double r0, double kappa,
                                int count, double p, ExcessMode mode) {
    ExcessTable t;
    t.center = center;
    t.p = p;
    t.kappa = kappa;
    t.mode = mode;
    double r = r0;
    for (int k = 0; k < count; ++k) {
        try {
            double phi = excess(u, center, r, p, mode);
            t.radii.push_back(r);
            t.phi.push_back(phi);
        } catch (const numeric_error&) {
            break;  // resolution floor reached
        }
        r *= kappa;
    }
    // least-squares slope of log phi against log r over entries above the
    // derivative-noise floor
    const GridSpec& g = u.u.grid();
    double floor = 1e-10 / std::min(g.hx(), g.hy());
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < t.radii.size(); ++k) {
        if (t.phi[k] <= floor) continue;
        xs.push_back(std::log(t.radii[k]));
        ys.push_back(std::log(t.phi[k]));
    }
    t.usable_steps = static_cast<int>(xs.size());
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            mx += xs[k];
            my += ys[k];
        }
        mx /= xs.size();
        my /= xs.size();
        double sxx = 0, sxy = 0, see = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sxx += sqr(xs[k] - mx);
            sxy += (xs[k] - mx) * (ys[k] - my);
        }
        t.fitted_exponent = sxy / sxx;
        for (std::size_t k = 0; k < xs.size(); ++k)
            see += sqr(ys[k] - my - t.fitted_exponent * (xs[k] - mx));
        t.exponent_stderr =
            xs.size() > 2 ? std::sqrt(see / (xs.size() - 2) / sxx) : 0.0;
    }
    return t;
}

/// Run excess tables at several centers and fit the one-step inequality
/// constants: C0 from steps where the oscillation term is negligible, C as
/// the max residual ratio over the rest.
inline DecayStudy decay_study(const DiscreteSolution& u, const std::vector<Vec2>& centers,
                              double r0, double kappa, int count, double p, ExcessMode mode,
                              const Modulus& omega_A, const Modulus& omega_g, double du_inf) {
    DecayStudy st;
    st.grid_floor = 1e-10 / std::min(u.u.grid().hx(), u.u.grid().hy());
    const double dim_factor = std::pow(4.0, (1.0 - p) / p) * kappa;
    const double kpow = std::pow(kappa, -2.0 / p) + 1.0;
    for (Vec2 c : centers) {
        ExcessTable t = excess_table(u, c, r0, kappa, count, p, mode);
        std::vector<DecayStepCheck> checks;
        for (std::size_t k = 0; k + 1 < t.radii.size(); ++k) {
            DecayStepCheck ck;
            ck.r = t.radii[k];
            ck.phi_r = t.phi[k];
            ck.phi_kr = t.phi[k + 1];
            ck.osc_term =
                kpow * (omega_A.clamped(2.0 * ck.r) * du_inf + omega_g.clamped(2.0 * ck.r));
            if (t.phi[k] > 1e-14) ck.c0_candidate = ck.phi_kr / (dim_factor * ck.phi_r);
            checks.push_back(ck);
        }
        st.tables.push_back(std::move(t));
        st.steps.push_back(std::move(checks));
    }
    // C0: max candidate over steps dominated by the contraction part
    for (const auto& checks : st.steps)
        for (const auto& ck : checks) {
            if (ck.osc_term <= 0.1 * std::max(ck.phi_kr, 1e-300) && ck.c0_candidate > 0.0)
                st.fitted_C0 = std::max(st.fitted_C0, ck.c0_candidate);
        }
    if (st.fitted_C0 == 0.0) st.fitted_C0 = 1.0;
    // C: max residual over the oscillation-driven steps
    for (const auto& checks : st.steps)
        for (const auto& ck : checks) {
            if (ck.osc_term <= 0.0) continue;
            double resid = ck.phi_kr - dim_factor * st.fitted_C0 * ck.phi_r;
            if (resid > 0.0) st.fitted_C = std::max(st.fitted_C, resid / ck.osc_term);
        }
    return st;
}

}  // namespace dinireg
