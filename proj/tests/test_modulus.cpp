#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "dinireg/dini_integral.hpp"
#include "dinireg/majorant.hpp"
#include "dinireg/modulus.hpp"

using namespace dinireg;

TEST_CASE("dini_integral on closed forms") {
    // w(t) = t: integrand is 1, integral over [0,1] is 1
    auto lin = Modulus::power(1.0);
    auto r = dini_integral(lin, 0.0, 1.0);
    REQUIRE_FALSE(r.divergent);
    REQUIRE(r.value == Catch::Approx(1.0).margin(1e-8));

    // w(t) = sqrt(t): antiderivative 2 sqrt(t), integral 2
    auto root = Modulus::power(0.5);
    r = dini_integral(root, 0.0, 1.0);
    REQUIRE_FALSE(r.divergent);
    REQUIRE(r.value == Catch::Approx(2.0).margin(1e-8));

    // positive lower end: plain quadrature branch
    r = dini_integral(root, 0.25, 1.0);
    REQUIRE(r.value == Catch::Approx(2.0 - 2.0 * 0.5).margin(1e-8));
}

TEST_CASE("dini_integral detects the divergent log case") {
    // w(t) = (ln(e/t))^{-1}: antiderivative -ln ln(e/t), divergent at 0.
    // Oracle: dyadic tail sums grow without bound.
    auto w = Modulus::log_power(1.0);
    auto r = dini_integral(w, 0.0, 1.0);
    REQUIRE(r.divergent);

    // independent oracle: partial dyadic sums keep growing by >= c per octave
    double prev = 0.0;
    bool grows = true;
    for (int dec = 1; dec <= 6; ++dec) {
        double lo = std::pow(2.0, -8.0 * dec);
        double cur = dini_integral(w, lo, 1.0).value;
        if (dec > 1 && cur - prev < 0.05) grows = false;
        prev = cur;
    }
    REQUIRE(grows);
}

TEST_CASE("classify separates the log powers") {
    REQUIRE(classify(Modulus::power(0.3)).classification == DiniClass::double_dini);
    REQUIRE(classify(Modulus::power(0.7)).classification == DiniClass::double_dini);
    REQUIRE(classify(Modulus::log_power(1.0)).classification == DiniClass::neither);
    REQUIRE(classify(Modulus::log_power(2.0)).classification == DiniClass::dini);
    REQUIRE(classify(Modulus::log_power(3.0)).classification == DiniClass::double_dini);
    REQUIRE(classify(Modulus::zero()).classification == DiniClass::double_dini);
}

TEST_CASE("classify oracle: adaptive quadrature of both integrals for log powers") {
    // For w = (ln(e/t))^{-2} the Dini integral has antiderivative
    // (ln(e/t))^{-1}; value over (0,1] is exactly 1.
    auto w2 = Modulus::log_power(2.0);
    auto rep = classify(w2);
    REQUIRE(rep.dini_integral.value ==
            Catch::Approx(1.0).margin(rep.dini_integral.error_estimate + 5e-3));
    // and the double-Dini integrand behaves like 1/(t ln(e/t)): divergent
    REQUIRE(rep.double_dini_integral.divergent);

    // (ln(e/t))^{-3}: Dini value = 1/2 (antiderivative (1/2)(ln(e/t))^{-2})
    auto w3 = Modulus::log_power(3.0);
    rep = classify(w3);
    REQUIRE(rep.dini_integral.value ==
            Catch::Approx(0.5).margin(rep.dini_integral.error_estimate + 5e-3));
    REQUIRE_FALSE(rep.double_dini_integral.divergent);
}

TEST_CASE("classify is scale invariant") {
    auto base = Modulus::log_power(2.0);
    for (double c : {0.5, 0.8, 1.25, 2.0}) {
        Modulus scaled = Modulus::derived(
            [base, c](double t) { return base.clamped(c * t); }, std::min(1.0, 1.0 / c),
            "scaled");
        REQUIRE(classify(scaled).classification == classify(base).classification);
    }
}

TEST_CASE("double Dini implies Dini in reports") {
    for (auto w : {Modulus::power(0.4), Modulus::log_power(2.0), Modulus::log_power(3.0),
                   Modulus::log_power(1.0)}) {
        auto rep = classify(w);
        if (!rep.double_dini_integral.divergent) REQUIRE_FALSE(rep.dini_integral.divergent);
    }
}

TEST_CASE("quadrature convergence: halving the shell step stays within error bars") {
    for (auto w : {Modulus::power(0.5), Modulus::power(1.0), Modulus::log_power(2.0)}) {
        auto coarse = dini_integral(w, 1e-6, 1.0);
        // independent finer evaluation, split domain
        double fine = dini_integral(w, 1e-6, 1e-3).value + dini_integral(w, 1e-3, 1.0).value;
        REQUIRE(std::abs(coarse.value - fine) <= coarse.error_estimate + 1e-9);
    }
}

TEST_CASE("modulus table validation") {
    REQUIRE_THROWS_AS(Modulus::table({0.0, 0.5, 0.4}, {0.0, 0.1, 0.2}), invalid_input);
    REQUIRE_THROWS_AS(Modulus::table({0.0, 0.5, 1.0}, {0.0, 0.3, 0.2}), invalid_input);
    auto t = Modulus::table({0.1, 0.5, 1.0}, {0.05, 0.3, 0.31});
    REQUIRE(t(0.0) == 0.0);  // (0,0) prepended
    REQUIRE(t(0.75) == Catch::Approx(0.305));
    REQUIRE_THROWS_AS(t(1.5), std::domain_error);
    REQUIRE(t.clamped(1.5) == Catch::Approx(0.31));
}

TEST_CASE("doubling constants of closed forms") {
    auto [c1, c2] = Modulus::power(0.5).doubling_constants();
    REQUIRE(c2 <= 1.0 + 1e-12);
    REQUIRE(c1 == Catch::Approx(std::pow(0.5, 0.5)).epsilon(1e-6));
}

TEST_CASE("majorant of powers: closed-form cases") {
    // beta above the exponent: scaled profile decreasing, sup at s = t
    auto w = Modulus::power(0.5, 1.0, 1.0);
    auto maj = majorant_beta(w, 0.75);
    for (double t : {1e-6, 1e-3, 0.1, 0.7, 1.0})
        REQUIRE(maj(t) == Catch::Approx(w(t)).margin(1e-12));

    // beta below: sup at s = a, majorant is t^beta * a^{alpha-beta}
    auto maj2 = majorant_beta(w, 0.25);
    for (double t : {1e-6, 1e-3, 0.1, 0.7, 1.0})
        REQUIRE(maj2(t) == Catch::Approx(std::pow(t, 0.25)).margin(1e-12));
}

TEST_CASE("majorant conclusions hold exactly on closed forms") {
    // pointwise domination and scaled monotonicity, tolerance 1e-9
    for (auto w : {Modulus::power(0.5), Modulus::log_power(2.0), Modulus::power_log(0.3, 1.5)}) {
        for (double beta : {0.3, 0.6, 1.0}) {
            auto maj = majorant_beta(w, beta);
            double prev_ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= 200; ++i) {
                double t = std::pow(10.0, -8.0 + 8.0 * i / 200.0);
                REQUIRE(maj(t) >= w(t) - 1e-9);
                double ratio = maj(t) / std::pow(t, beta);
                REQUIRE(ratio <= prev_ratio * (1.0 + 1e-9));
                prev_ratio = ratio;
            }
        }
    }
}

TEST_CASE("majorant preserves Dini class and doubling") {
    auto w = Modulus::log_power(2.0);
    auto maj = majorant_beta(w, 0.5);
    REQUIRE(classify(maj).classification == DiniClass::dini);
    auto [c1, c2] = maj.doubling_constants();
    REQUIRE(c1 > 0.0);
    REQUIRE(c2 < 10.0);
}

TEST_CASE("majorant of a perturbed monotone table matches brute-force sup") {
    // monotone ramp with a sine wiggle kept nondecreasing
    std::vector<double> ts, ws;
    const int n = 120;
    double acc = 0.0;
    for (int i = 1; i <= n; ++i) {
        double t = static_cast<double>(i) / n;
        acc += (1.0 + std::sin(12.0 * t)) / n;
        ts.push_back(t);
        ws.push_back(acc);
    }
    auto w = Modulus::table(ts, ws);
    const double beta = 0.6;
    auto maj = majorant_beta(w, beta);

    // oracle: exhaustive sup over the sample grid s >= t (lower bound for
    // the continuum sup)
    auto oracle = [&](double t) {
        double best = w(t);
        for (std::size_t i = 0; i < ts.size(); ++i)
            if (ts[i] >= t) best = std::max(best, std::pow(t / ts[i], beta) * ws[i]);
        return best;
    };
    for (double t : {0.01, 0.05, 0.13, 0.42, 0.77, 0.995}) {
        REQUIRE(maj(t) >= oracle(t) - 1e-12);
        REQUIRE(maj(t) <= oracle(t) * 1.05 + 1e-9);  // pieces add little over grid sup
        REQUIRE(maj(t) >= w(t));
    }
}

TEST_CASE("modulus JSON round trip") {
    auto w = Modulus::power(0.5, 0.2, 1.0);
    auto j = w.to_json();
    REQUIRE(j["kind"] == "power");
    auto back = Modulus::from_json(j);
    REQUIRE(back(0.3) == Catch::Approx(w(0.3)));

    auto t = Modulus::table({0.0, 0.5, 1.0}, {0.0, 0.2, 0.4});
    auto jt = t.to_json();
    auto tb = Modulus::from_json(jt);
    REQUIRE(tb(0.25) == Catch::Approx(t(0.25)));
}
