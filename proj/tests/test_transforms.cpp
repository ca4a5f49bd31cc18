#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dinireg/transform_chain.hpp"

using namespace dinireg;

namespace {

// Brute-force evaluators of the defining formulas, independent of the
// library implementation: long explicit tails, dense sups, fine quadrature.
struct Oracle {
    Modulus w;
    double kappa, beta;

    double tilde(double t) const {
        double sum = 0.0;
        for (int i = 1; i <= 10000; ++i) {
            double weight = std::pow(kappa, i * beta);
            if (weight < 1e-18) break;
            double arg = t * std::pow(kappa, -i);
            sum += weight * (arg <= 1.0 ? w.clamped(arg) : w.clamped(1.0));
        }
        return sum;
    }
    double sharp(double t) const {
        double best = 0.0;
        const int n = 20000;
        for (int i = 0; i <= n; ++i) {
            double s = t * std::pow(1.0 / t, static_cast<double>(i) / n);  // log spaced [t,1]
            best = std::max(best, std::pow(t / s, beta) * tilde(s));
        }
        return best;
    }
    double hat(double t) const { return tilde(t) + tilde(4 * t) + sharp(4 * t); }
    double integral_tilde(double upper) const {
        // log-substituted composite Simpson down to 1e-14
        const double s_lo = -std::log(upper), s_hi = -std::log(1e-14);
        const int n = 4000;
        const double h = (s_hi - s_lo) / n;
        double acc = tilde(std::exp(-s_lo)) + tilde(std::exp(-s_hi));
        for (int i = 1; i < n; ++i)
            acc += (i % 2 ? 4.0 : 2.0) * tilde(std::exp(-(s_lo + i * h)));
        return acc * h / 3.0;
    }
    double star(double t) const {
        return hat(t) + integral_tilde(t) + tilde(4 * t) + integral_tilde(4 * t);
    }
};

}  // namespace

TEST_CASE("transform chain of the zero modulus vanishes") {
    auto chain = transform_chain(Modulus::zero(), 0.25, 0.5);
    for (double t : {1e-8, 1e-4, 0.1, 0.25}) {
        REQUIRE(chain.tilde.clamped(t) == 0.0);
        REQUIRE(chain.sharp.clamped(t) == 0.0);
        REQUIRE(chain.hat.clamped(t) == 0.0);
        REQUIRE(chain.star.clamped(t) == 0.0);
    }
}

TEST_CASE("transform chain parameter validation") {
    REQUIRE_THROWS_AS(transform_chain(Modulus::power(0.5), 0.6, 0.5), invalid_input);
    REQUIRE_THROWS_AS(transform_chain(Modulus::power(0.5), 0.25, 1.0), invalid_input);
}

TEST_CASE("transform chain against brute-force summation at t = 1/16") {
    Oracle o{Modulus::power(1.0), 0.25, 0.5};
    auto chain = transform_chain(o.w, o.kappa, o.beta);
    const double t = 1.0 / 16.0;

    // hand value of the series at t = 1/16: 1/8 + 1/4 + sum_{i>=3} 2^-i = 5/8
    REQUIRE(o.tilde(t) == Catch::Approx(0.625).margin(1e-12));

    REQUIRE(chain.tilde(t) == Catch::Approx(o.tilde(t)).margin(1e-6));
    REQUIRE(chain.sharp(t) == Catch::Approx(o.sharp(t)).margin(1e-6));
    REQUIRE(chain.hat(t) == Catch::Approx(o.hat(t)).margin(1e-6));
    REQUIRE(chain.star(t) == Catch::Approx(o.star(t)).margin(2e-5));
}

TEST_CASE("transform outputs are nondecreasing and vanish at zero") {
    auto chain = transform_chain(Modulus::log_power(2.0), 0.25, 0.5);
    const Modulus* mods[] = {&chain.tilde, &chain.sharp, &chain.hat, &chain.star};
    for (const Modulus* m : mods) {
        REQUIRE((*m)(0.0) == 0.0);
        double prev = 0.0;
        for (int i = 0; i <= 60; ++i) {
            double t = m->right_end() * std::pow(10.0, -6.0 + 6.0 * i / 60.0);
            double v = m->clamped(t);
            REQUIRE(v >= prev - 1e-10);
            prev = v;
        }
    }
}

TEST_CASE("hat is controlled by sharp at the quadrupled argument") {
    auto chain = transform_chain(Modulus::power(0.5), 0.25, 0.75);
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
        double t = 0.25 * std::pow(10.0, -5.0 + 5.0 * i / 40.0);
        worst = std::max(worst, chain.hat(t) / std::max(chain.sharp.clamped(4 * t), 1e-300));
    }
    REQUIRE(worst < 10.0);
    REQUIRE(std::isfinite(worst));
}

TEST_CASE("Holder input: star stays comparable to the input power") {
    const double alpha = 0.5, beta = 0.75, kappa = 0.25;
    Oracle o{Modulus::power(alpha), kappa, beta};
    auto chain = transform_chain(o.w, kappa, beta);
    REQUIRE(chain.input_class == DiniClass::double_dini);
    REQUIRE(chain.star_vanishes);

    for (int i = 0; i <= 24; ++i) {
        double t = std::pow(10.0, -4.0 + (std::log10(0.25) + 4.0) * i / 24.0);
        double ours = chain.star(t) / std::pow(t, alpha);
        double oracle = o.star(t) / std::pow(t, alpha);
        REQUIRE(ours == Catch::Approx(oracle).epsilon(0.05));
        REQUIRE(std::isfinite(ours));
    }
}

TEST_CASE("star vanishes for Dini inputs and is flagged otherwise") {
    auto dini = transform_chain(Modulus::log_power(2.0), 0.25, 0.5);
    REQUIRE(dini.star_vanishes);
    Oracle o{Modulus::log_power(2.0), 0.25, 0.5};
    double cap = 3.0 * o.star(1e-3);
    REQUIRE(dini.star(1e-3) <= cap);

    auto not_dini = transform_chain(Modulus::log_power(1.0), 0.25, 0.5);
    REQUIRE_FALSE(not_dini.star_vanishes);
    REQUIRE(not_dini.input_class == DiniClass::neither);
}
