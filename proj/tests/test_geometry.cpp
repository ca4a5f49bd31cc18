#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dinireg/dini_extension.hpp"
#include "dinireg/flatten.hpp"
#include "dinireg/mollifier.hpp"
#include "dinireg/regularized_distance.hpp"

using namespace dinireg;

TEST_CASE("mollifier mass is one") {
    MollifierSpec zeta;
    REQUIRE(zeta.normalization() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE_THROWS_AS(MollifierSpec(8, 48), invalid_input);
}

TEST_CASE("mollified lift: half-space and t = 0 are exact") {
    MollifierSpec zeta;
    auto halfspace = [](Vec2 p) { return p.y(); };
    for (double t : {0.0, 0.05, 0.3}) {
        REQUIRE(mollified_lift(halfspace, zeta, t, {0.3, 0.7}) ==
                Catch::Approx(0.7).margin(1e-12));
    }
    auto cusp = [](Vec2 p) { return p.y() - std::pow(std::abs(p.x()), 1.5); };
    REQUIRE(mollified_lift(cusp, zeta, 0.0, {0.2, 0.5}) ==
            Catch::Approx(cusp({0.2, 0.5})).margin(1e-15));
}

TEST_CASE("mollified lift against adaptive cubature") {
    MollifierSpec zeta;
    auto psi0 = [](Vec2 p) { return p.y() - std::pow(std::abs(p.x()), 1.5); };
    const Vec2 x{0.15, 0.4};
    const double t = 0.2;

    // oracle: nested adaptive quadrature in polar coordinates
    auto ring = [&](double r) {
        auto f = [&](double th) {
            return psi0({x.x() - t * r * std::cos(th), x.y() - t * r * std::sin(th)});
        };
        return adaptive_simpson(f, 0.0, 2.0 * std::numbers::pi, 1e-12, 30);
    };
    auto radial = [&](double r) { return r * zeta.profile(r) * ring(r); };
    double oracle = adaptive_simpson(radial, 0.0, 1.0, 1e-11, 30);

    REQUIRE(mollified_lift(psi0, zeta, t, x) == Catch::Approx(oracle).margin(1e-9));
}

TEST_CASE("lift is Lipschitz in the pace parameter") {
    MollifierSpec zeta;
    GraphDomain dom = GraphDomain::parabolic();
    auto psi0 = [&](Vec2 p) { return dom.psi0(p); };
    const double K = dom.lipschitz_K();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 0.5), ux(-0.5, 0.5), uy(0.0, 0.8);
    for (int k = 0; k < 40; ++k) {
        Vec2 x{ux(rng), uy(rng)};
        double t1 = ut(rng), t2 = ut(rng);
        double lhs = std::abs(mollified_lift(psi0, zeta, t1, x) -
                              mollified_lift(psi0, zeta, t2, x));
        REQUIRE(lhs <= K * std::abs(t1 - t2) + 1e-12);
    }
}

TEST_CASE("regularized distance on the half-space is psi0 / 2") {
    RegularizedDistance psi(GraphDomain::flat(), MollifierSpec{});
    REQUIRE(psi.domain().lipschitz_K() == Catch::Approx(1.0));
    for (double y : {0.05, 0.3, 0.9}) {
        auto fp = psi.solve({0.1, y});
        REQUIRE(fp.value == Catch::Approx(y / 2.0).margin(1e-11));
        REQUIRE(fp.iterations <= 60);
    }
    REQUIRE(psi({0.4, 0.0}) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("regularized distance is comparable to the projection distance") {
    GraphDomain dom = GraphDomain::parabolic();
    RegularizedDistance psi(dom, MollifierSpec{});
    const double K = dom.lipschitz_K(), delta = dom.comparability_delta();

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ux(-0.6, 0.6), uy(0.0, 1.0);
    int tested = 0;
    while (tested < 60) {
        Vec2 x{ux(rng), uy(rng)};
        if (!dom.contains(x) || dom.psi0(x) < 1e-3) continue;
        ++tested;
        auto fp = psi.solve(x);
        REQUIRE(fp.iterations <= 60);
        const double dist = dom.distance_to_boundary(x);
        REQUIRE(delta * K * fp.value <= dist * (1.0 + 1e-9));
        REQUIRE(dist <= 3.0 * K / delta * fp.value * (1.0 + 1e-9));
        // the bracketed ratio against the defining function
        double ratio = K * fp.value / dom.psi0(x);
        REQUIRE(ratio >= 1.0 / 3.0 - 1e-9);
        REQUIRE(ratio <= 1.0 + 1e-9);
    }
}

TEST_CASE("fixed point gaps contract by one half") {
    GraphDomain dom = GraphDomain::parabolic();
    MollifierSpec zeta;
    const double K = dom.lipschitz_K();
    auto lift = [&](Vec2 p) { return dom.psi0(p); };
    Vec2 x{0.25, 0.5};
    double t = dom.psi0(x) / (2.0 * K);
    double prev_gap = -1.0;
    for (int k = 0; k < 25; ++k) {
        double next = mollified_lift(lift, zeta, t, x) / (2.0 * K);
        double gap = std::abs(next - t);
        if (prev_gap > 1e-14)
            REQUIRE(gap <= prev_gap * (0.5 + 1e-12));
        prev_gap = gap;
        t = next;
    }
}

TEST_CASE("regularized distance: sign inheritance and gradient bound") {
    GraphDomain dom = GraphDomain::parabolic();
    RegularizedDistance psi(dom, MollifierSpec{});
    REQUIRE(psi({0.0, 0.4}) > 0.0);
    REQUIRE(psi({0.0, -0.3}) < 0.0);
    REQUIRE(std::abs(psi({0.5, 0.0625})) < 1e-10);  // on the graph

    for (Vec2 x : {Vec2{0.0, 0.2}, Vec2{0.3, 0.5}, Vec2{-0.4, 0.3}}) {
        REQUIRE(psi.gradient(x).norm() <= 1.0 + 1e-4);
    }
}

TEST_CASE("derivative ratios stay bounded approaching the boundary") {
    GraphDomain dom = GraphDomain::parabolic();
    RegularizedDistance psi(dom, MollifierSpec{});
    std::vector<Vec2> pts;
    for (int k = 1; k <= 8; ++k) pts.push_back({0.2, 0.01 + 0.4 / k});
    auto rep = regularized_distance_derivative_report(psi, pts);
    REQUIRE(rep.skipped == 0);
    REQUIRE(rep.sup_grad <= 1.0 + 1e-4);
    REQUIRE(rep.sup_hess_ratio < 50.0);
    REQUIRE(rep.sup_third_ratio < 500.0);
    // half-space control: hessian vanishes identically
    RegularizedDistance flat(GraphDomain::flat(), MollifierSpec{});
    auto rep0 = regularized_distance_derivative_report(flat, {{0.1, 0.3}, {0.4, 0.6}});
    REQUIRE(rep0.sup_hess_ratio < 1e-6);
}

TEST_CASE("extension keeps constants and half-space linears") {
    GraphDomain flat = GraphDomain::flat();
    MollifierSpec zeta;
    DiniExtension c(flat, zeta, [](Vec2) { return 3.25; });
    for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-0.3, 0.7}})
        REQUIRE(c(x) == Catch::Approx(3.25).margin(1e-12));

    DiniExtension lin(flat, zeta, [](Vec2 p) { return 2.0 * p.x() - 0.5 * p.y(); });
    for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-0.3, 0.7}})
        REQUIRE(lin(x) == Catch::Approx(2.0 * x.x() - 0.5 * x.y()).margin(1e-12));
}

TEST_CASE("extension of a cusp on the parabolic domain") {
    GraphDomain dom = GraphDomain::parabolic();
    MollifierSpec zeta;
    auto u = [](Vec2 p) { return std::pow(std::abs(p.x()), 1.5); };
    DiniExtension ext(dom, zeta, u);

    // boundary trace: psi = 0 there, so the lift collapses to point values
    for (double s : {-0.5, -0.1, 0.0, 0.3, 0.6}) {
        Vec2 xb = dom.boundary_point(s);
        REQUIRE(std::abs(ext(xb) - u(xb)) <= 1e-6);
    }

    // interior growth: |D^2 ext| d / (rho_Du(d) + rho_Dpsi0(d)) bounded,
    // with rho_Du(t) ~ 3 sqrt(t) for the cusp data
    double worst = 0.0;
    for (double d : {0.05, 0.1, 0.2, 0.4}) {
        Vec2 x{0.2, dom.gamma(0.2) + d};
        double dd = dom.distance_to_boundary(x);
        double denom = 3.0 * std::sqrt(dd) + dom.rho_dpsi0().clamped(dd);
        worst = std::max(worst, ext.hessian(x).norm() * dd / denom);
    }
    REQUIRE(worst < 20.0);
    REQUIRE(std::isfinite(worst));
}

TEST_CASE("flattening the half-space is the linear halving map") {
    GraphDomain flat = GraphDomain::flat();
    MollifierSpec zeta;
    EquationData eq{[](Vec2) { return Mat2::Identity(); }, [](Vec2) { return Vec2::Zero().eval(); },
                    [](Vec2) { return 0.0; }, [](Vec2) { return 0.0; }};
    auto u = [](Vec2 p) { return p.x() + p.y() * p.y(); };
    auto du = [](Vec2 p) { return Vec2{1.0, 2.0 * p.y()}; };
    auto fp = flatten_by_distance(flat, zeta, {0.25, 0.0}, 0.5, eq, u, du);

    Vec2 z = fp.map.forward({0.45, 0.3});
    REQUIRE(z.x() == Catch::Approx(0.2).margin(1e-12));
    REQUIRE(z.y() == Catch::Approx(0.15).margin(1e-10));

    // transformed identity coefficients: diag(1, 1/4)
    Mat2 A = fp.data.A({0.05, 0.1});
    REQUIRE(A(0, 0) == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(A(1, 1) == Catch::Approx(0.25).margin(1e-8));
    REQUIRE(std::abs(A(0, 1)) < 1e-8);

    // h vanishes: the distance is linear
    REQUIRE(fp.h({0.3, 0.2}).norm() < 1e-7);
}

TEST_CASE("flattening the parabolic patch") {
    GraphDomain dom = GraphDomain::parabolic();
    MollifierSpec zeta;
    EquationData eq{[](Vec2) { return Mat2::Identity(); }, [](Vec2) { return Vec2::Zero().eval(); },
                    [](Vec2) { return 0.0; }, [](Vec2) { return 1.0; }};
    auto u = [](Vec2 p) { return p.x() * p.x() + 0.5 * p.y() * p.y(); };
    auto du = [](Vec2 p) { return Vec2{2.0 * p.x(), p.y()}; };
    Vec2 x0 = dom.boundary_point(0.0);
    auto fp = flatten_by_distance(dom, zeta, x0, 0.4, eq, u, du);
    REQUIRE(fp.s0 > 0.01);

    // round trip on interior points
    std::vector<Vec2> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({-0.3 + 0.05 * i, 0.05 + 0.03 * i});
    REQUIRE(fp.map.roundtrip_error(pts) <= 1e-8);

    // boundary flattens
    for (double s : {-0.3, -0.1, 0.2, 0.35}) {
        Vec2 z = fp.map.forward(dom.boundary_point(s));
        REQUIRE(std::abs(z.y()) <= 1e-8);
    }

    // jacobian chain rule against an independent high-order difference of
    // the forward map
    for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-0.2, 0.35}}) {
        Mat2 J = fp.map.jacobian(x);
        const double h = 1e-5;
        for (int c = 0; c < 2; ++c) {
            Vec2 e = c == 0 ? Vec2{1, 0} : Vec2{0, 1};
            Vec2 d1 = (fp.map.forward(x + h * e) - fp.map.forward(x - h * e)) / (2 * h);
            Vec2 d2 = (fp.map.forward(x + 0.5 * h * e) - fp.map.forward(x - 0.5 * h * e)) / h;
            Vec2 rich = (4.0 * d2 - d1) / 3.0;
            REQUIRE(J(0, c) == Catch::Approx(rich.x()).margin(1e-6));
            REQUIRE(J(1, c) == Catch::Approx(rich.y()).margin(1e-6));
        }
        // transformed ellipticity: congruence keeps eigenvalues positive
        Mat2 A = fp.data.A(fp.map.forward(x));
        double tr = A.trace(), det = A.determinant();
        double lam_min = tr / 2.0 - std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        REQUIRE(lam_min > 0.05);
    }

    // transformed source picks up the h correction: f~ = f - tr(A h)
    Vec2 zq{0.05, 0.08};
    Vec2 xq = fp.map.inverse(zq);
    double f_tilde = fp.data.f(zq);
    double expect = 1.0 - (eq.A(xq) * fp.h(xq)).trace();
    REQUIRE(f_tilde == Catch::Approx(expect).margin(1e-7));

    auto check = h_field_modulus_check(fp, fp.s0, 8);
    REQUIRE(check.pass);
    REQUIRE(check.sup_pointwise_ratio < 100.0);
    REQUIRE(check.sup_pairwise_ratio < 200.0);
}
