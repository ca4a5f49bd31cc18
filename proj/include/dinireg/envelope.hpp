#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dinireg/common.hpp"
#include "dinireg/modulus.hpp"

namespace dinireg {

/// Linear system dX/dt = A(t) X + B(t) on [0, tau) whose forcing blows up
/// like (tau-t)^{-2} rho(tau-t).  Under |A| <= K0 and the stated forcing
/// bound, every solution obeys
///     |X(t)| <= N0 e^{K0 t} (tau - t)^{-1} rho(tau - t),
///     N0 = max( tau rho(tau)^{-1} |X(0)|, K1 / (1 - mu) ),
/// provided t^{-mu} rho(t) is nonincreasing.
struct EnvelopeProblem {
    std::function<Eigen::MatrixXd(double)> A;
    std::function<Eigen::VectorXd(double)> B;
    Eigen::VectorXd X0;
    double tau = 1.0;
    double K0 = 0.0, K1 = 0.0;
    double mu = 0.5;
    Modulus rho;  // positive on (0, tau], right end >= tau
};

struct EnvelopeResult {
    bool pass = false;
    double margin = 0.0;  // min over t of (bound - |X|)/bound
    double N0 = 0.0;
    double worst_t = 0.0;
};

/// Integrate the system to tau (1 - 2^-20) and compare |X| against the
/// envelope.  Hypotheses are checked on a sample grid first; a violation is
/// a rejected input naming the failing time.  The base step h is capped
/// near tau so the blowing-up forcing stays resolved.
inline EnvelopeResult envelope_check(const EnvelopeProblem& p, double h) {
    if (!(p.tau > 0.0) || !(h > 0.0)) throw invalid_input("envelope_check: need tau, h > 0");
    if (!(p.mu > 0.0) || !(p.mu < 1.0)) throw invalid_input("envelope_check: mu must be in (0,1)");
    if (p.rho.right_end() < p.tau * (1.0 - 1e-12))
        throw invalid_input("envelope_check: rho must be defined up to tau");

    const double t_end = p.tau * (1.0 - std::pow(2.0, -20.0));

    // hypothesis scan
    for (int i = 0; i <= 200; ++i) {
        double t = t_end * i / 200.0;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.A(t));
        double a_norm = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        if (a_norm > p.K0 * (1.0 + 1e-9) + 1e-12)
            throw invalid_input("envelope_check: |A| exceeds K0 at t = " + std::to_string(t));
        double b_cap = p.K1 * std::exp(p.K0 * t) * p.rho.clamped(p.tau - t) / sqr(p.tau - t);
        if (p.B(t).norm() > b_cap * (1.0 + 1e-9) + 1e-12)
            throw invalid_input("envelope_check: |B| exceeds its envelope at t = " +
                                std::to_string(t));
        double r1 = p.rho.clamped(p.tau - t) / std::pow(p.tau - t, p.mu);
        double t2 = 0.5 * (p.tau - t);
        double r2 = p.rho.clamped(t2) / std::pow(t2, p.mu);
        if (r2 < r1 * (1.0 - 1e-9) - 1e-12)
            throw invalid_input("envelope_check: t^{-mu} rho(t) increases near t = " +
                                std::to_string(t));
    }

    const double rho_tau = p.rho.clamped(p.tau);
    if (!(rho_tau > 0.0)) throw invalid_input("envelope_check: rho(tau) must be positive");
    EnvelopeResult out;
    out.N0 = std::max(p.tau / rho_tau * p.X0.norm(), p.K1 / (1.0 - p.mu));

    auto bound = [&](double t) {
        return out.N0 * std::exp(p.K0 * t) * p.rho.clamped(p.tau - t) / (p.tau - t);
    };
    auto rhs = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return p.A(t) * x + p.B(t);
    };

    Eigen::VectorXd x = p.X0;
    double t = 0.0;
    out.margin = (bound(0.0) - x.norm()) / bound(0.0);
    out.worst_t = 0.0;
    while (t < t_end) {
        double step = std::min({h, 0.05 * (p.tau - t), t_end - t});
        Eigen::VectorXd k1 = rhs(t, x);
        Eigen::VectorXd k2 = rhs(t + step / 2, x + (step / 2) * k1);
        Eigen::VectorXd k3 = rhs(t + step / 2, x + (step / 2) * k2);
        Eigen::VectorXd k4 = rhs(t + step, x + step * k3);
        x += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += step;
        double m = (bound(t) - x.norm()) / bound(t);
        if (m < out.margin) {
            out.margin = m;
            out.worst_t = t;
        }
    }
    out.pass = out.margin >= -1e-6;
    return out;
}

/// Scalar convenience constructor.
inline EnvelopeProblem scalar_envelope(std::function<double(double)> a,
                                       std::function<double(double)> b, double x0, double tau,
                                       double K0, double K1, double mu, Modulus rho) {
    EnvelopeProblem p;
    p.A = [a = std::move(a)](double t) {
        Eigen::MatrixXd m(1, 1);
        m(0, 0) = a(t);
        return m;
    };
    p.B = [b = std::move(b)](double t) {
        Eigen::VectorXd v(1);
        v(0) = b(t);
        return v;
    };
    p.X0 = Eigen::VectorXd::Constant(1, x0);
    p.tau = tau;
    p.K0 = K0;
    p.K1 = K1;
    p.mu = mu;
    p.rho = std::move(rho);
    return p;
}

}  // namespace dinireg
