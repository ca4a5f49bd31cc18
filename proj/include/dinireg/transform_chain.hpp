#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "dinireg/dini_integral.hpp"
#include "dinireg/majorant.hpp"
#include "dinireg/modulus.hpp"

namespace dinireg {

/// The four-stage modulus transform used by the excess-decay estimates:
///   tilde:  geometric series resummation across dyadic scale jumps,
///   sharp:  scaled suffix envelope of tilde,
///   hat:    tilde(t) + tilde(4t) + sharp(4t),
///   star:   hat(t) + int_0^t tilde/s + tilde(4t) + int_0^t tilde(4s)/s.
/// star(t) -> 0 as t -> 0 exactly when the input is Dini; a non-Dini input
/// is not an error, just flagged.
struct TransformChain {
    Modulus tilde, sharp, hat, star;
    DiniClass input_class = DiniClass::neither;
    bool star_vanishes = false;
    double series_tail_tol = 0.0;
    double integral_tail_estimate = 0.0;
};

namespace detail {

/// Series evaluator valid for every t > 0 (constant for t >= 1).
class TildeSeries {
public:
    TildeSeries(Modulus w, double kappa, double beta, double tail_tol)
        : w_(std::move(w)), kappa_(kappa), beta_(beta) {
        kb_ = std::pow(kappa_, beta_);
        w1_ = w_.clamped(1.0);
        // terms beyond i_tail contribute a certified geometric remainder
        i_tail_ = 1;
        double tail = kb_ / (1.0 - kb_) * w1_;
        while (tail > tail_tol && i_tail_ < 100000) {
            ++i_tail_;
            tail *= kb_;
        }
    }

    double operator()(double t) const {
        if (t <= 0.0) return 0.0;
        double sum = 0.0;
        double weight = 1.0;
        for (int i = 1; i <= i_tail_; ++i) {
            weight *= kb_;
            if (weight * w1_ < 1e-300) break;
            double arg = t * std::pow(kappa_, -static_cast<double>(i));
            sum += weight * (arg <= 1.0 ? w_(arg) : w1_);
        }
        return sum;
    }

    double at_one() const { return kb_ / (1.0 - kb_) * w1_; }

private:
    Modulus w_;
    double kappa_, beta_, kb_, w1_;
    int i_tail_;
};

/// Cumulative integral I(t) = int_0^t f(s)/s ds on a log grid, truncated at
/// t_min; per-interval Simpson with midpoint evaluations.
class LogCumulative {
public:
    template <class F>
    LogCumulative(F&& f, double t_min, int n_intervals) {
        s_hi_ = -std::log(t_min);
        n_ = n_intervals;
        ds_ = s_hi_ / n_;
        prefix_.assign(n_ + 1, 0.0);
        // s = -ln t; integrate from large s (small t) downward
        double acc = 0.0;
        std::vector<double> vals(n_ + 1), mids(n_);
        for (int j = 0; j <= n_; ++j) vals[j] = f(std::exp(-(s_hi_ - j * ds_)));
        for (int j = 0; j < n_; ++j) mids[j] = f(std::exp(-(s_hi_ - (j + 0.5) * ds_)));
        prefix_[0] = 0.0;
        for (int j = 0; j < n_; ++j) {
            acc += ds_ / 6.0 * (vals[j] + 4.0 * mids[j] + vals[j + 1]);
            prefix_[j + 1] = acc;
        }
        // crude tail-decay estimate below t_min from the last two octaves
        double head = chunk(0, n_ / 8), next = chunk(n_ / 8, n_ / 4);
        double rho = next > 0.0 ? std::clamp(head / std::max(next, 1e-300), 0.0, 0.95) : 0.0;
        tail_estimate_ = head * rho / (1.0 - rho);
    }

    /// I(t) for t in [t_min, 1]; below t_min returns 0 (mass folded into
    /// the tail estimate).
    double operator()(double t) const {
        if (t <= std::exp(-s_hi_)) return 0.0;
        double j = (s_hi_ + std::log(std::min(t, 1.0))) / ds_;
        int j0 = std::clamp(static_cast<int>(j), 0, n_ - 1);
        double lam = j - j0;
        return prefix_[j0] + lam * (prefix_[j0 + 1] - prefix_[j0]);
    }

    double tail_estimate() const { return tail_estimate_; }

private:
    double chunk(int lo, int hi) const { return prefix_[hi] - prefix_[lo]; }
    double s_hi_, ds_, tail_estimate_;
    int n_;
    std::vector<double> prefix_;
};

}  // namespace detail

/// Build the transform quadruple for w (rescaled to [0,1] first when
/// needed), kappa in (0,1/2), beta in (0,1).
inline TransformChain transform_chain(const Modulus& w_in, double kappa, double beta,
                                      double series_tail_tol = 1e-10) {
    if (!(kappa > 0.0) || !(kappa < 0.5))
        throw invalid_input("transform_chain: kappa must lie in (0, 1/2)");
    if (!(beta > 0.0) || !(beta < 1.0))
        throw invalid_input("transform_chain: beta must lie in (0, 1)");

    const Modulus w = w_in.right_end() == 1.0 ? w_in : w_in.rescaled_to_unit();

    auto series = std::make_shared<detail::TildeSeries>(w, kappa, beta, series_tail_tol);

    TransformChain out;
    out.series_tail_tol = series_tail_tol;
    out.input_class = classify(w).classification;

    out.tilde = Modulus::derived([series](double t) { return (*series)(t); }, 1.0, "tilde");
    out.sharp = majorant_beta(out.tilde, beta);
    Modulus sharp = out.sharp;
    Modulus tilde = out.tilde;

    auto hat_eval = [series, sharp](double t) {
        t = std::min(t, 0.25);
        return (*series)(t) + (*series)(4.0 * t) + sharp(4.0 * t);
    };
    out.hat = Modulus::derived(hat_eval, 0.25, "hat");

    auto cumulative = std::make_shared<detail::LogCumulative>(
        [series](double t) { return (*series)(t); }, 1e-300, 16384);
    out.integral_tail_estimate = cumulative->tail_estimate();

    auto star_eval = [series, sharp, cumulative, hat_eval](double t) {
        t = std::min(t, 0.25);
        return hat_eval(t) + (*cumulative)(t) + (*series)(4.0 * t) + (*cumulative)(4.0 * t);
    };
    out.star = Modulus::derived(star_eval, 0.25, "star");

    out.star_vanishes = out.input_class != DiniClass::neither;
    return out;
}

}  // namespace dinireg
