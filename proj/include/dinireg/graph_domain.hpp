#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dinireg/common.hpp"
#include "dinireg/modulus.hpp"
#include "dinireg/quadrature.hpp"

namespace dinireg {

/// Domain above a graph: Omega = { x : x2 > gamma(x1) }, normalized so the
/// distinguished boundary point is the origin with gamma(0) = 0 and
/// gamma'(0) = 0.  The defining function is psi0(x) = x2 - gamma(x1), whose
/// gradient has length >= 1 on the boundary.  K bounds |D psi0| over the
/// (widened) patch and delta is the two-sided distance comparability
/// constant, both computed from the sampled graph gradient.
class GraphDomain {
public:
    GraphDomain(std::function<double(double)> gamma, std::function<double(double)> dgamma,
                Modulus rho_dgamma, double patch_halfwidth, std::string name = "custom",
                double widen_margin = 1.0)
        : gamma_(std::move(gamma)),
          dgamma_(std::move(dgamma)),
          rho_dgamma_(std::move(rho_dgamma)),
          b_(patch_halfwidth),
          name_(std::move(name)) {
        if (!(b_ > 0.0)) throw invalid_input("GraphDomain: patch half-width must be positive");
        if (std::abs(gamma_(0.0)) > 1e-12 || std::abs(dgamma_(0.0)) > 1e-12)
            throw invalid_input("GraphDomain: normalize so gamma(0) = 0, gamma'(0) = 0");
        const double wide = b_ + widen_margin;
        double lip = 0.0;
        for (int i = 0; i <= 800; ++i) {
            double s = -wide + 2.0 * wide * i / 800.0;
            lip = std::max(lip, std::abs(dgamma_(s)));
        }
        double lip_patch = 0.0;
        for (int i = 0; i <= 400; ++i) {
            double s = -b_ + 2.0 * b_ * i / 400.0;
            lip_patch = std::max(lip_patch, std::abs(dgamma_(s)));
        }
        if (lip_patch >= 0.5)
            throw invalid_input("GraphDomain: |gamma'| must stay below 1/2 on the patch");
        lip_gamma_ = lip;
        K_ = std::sqrt(1.0 + lip * lip);
        delta_ = 1.0 / std::sqrt(1.0 + lip * lip);
    }

    static GraphDomain flat() {
        return GraphDomain([](double) { return 0.0; }, [](double) { return 0.0; },
                           Modulus::zero(1.0), 1.0, "flat");
    }

    /// gamma(s) = s^2 / 4, so gamma'(s) = s/2 and rho_{gamma'}(t) = t/2.
    static GraphDomain parabolic() {
        return GraphDomain([](double s) { return 0.25 * s * s; },
                           [](double s) { return 0.5 * s; }, Modulus::power(1.0, 0.5, 1.0),
                           0.9, "parabolic");
    }

    /// cos-bump boundary: gamma(s) = amp * (1 - cos(freq s)), Lipschitz on
    /// the patch for small amp * freq.
    static GraphDomain cosine(double amp, double freq, double halfwidth) {
        double lip_bound = std::abs(amp * freq);
        Modulus rho = lip_bound == 0.0 ? Modulus::zero(1.0)
                                       : Modulus::power(1.0, std::abs(amp * freq * freq), 1.0);
        return GraphDomain([=](double s) { return amp * (1.0 - std::cos(freq * s)); },
                           [=](double s) { return amp * freq * std::sin(freq * s); }, rho,
                           halfwidth, "cosine");
    }

    static GraphDomain from_json(const nlohmann::json& j);

    double gamma(double s) const { return gamma_(s); }
    double dgamma(double s) const { return dgamma_(s); }
    Vec2 boundary_point(double s) const { return {s, gamma_(s)}; }
    /// Outward unit normal at the boundary point over s.
    Vec2 outward_normal(double s) const {
        Vec2 n{dgamma_(s), -1.0};
        return n / n.norm();
    }

    double psi0(Vec2 p) const { return p.y() - gamma_(p.x()); }
    Vec2 grad_psi0(Vec2 p) const { return {-dgamma_(p.x()), 1.0}; }
    bool contains(Vec2 p) const { return psi0(p) > 0.0; }

    double lipschitz_K() const { return K_; }
    double comparability_delta() const { return delta_; }
    double patch_halfwidth() const { return b_; }
    double graph_lipschitz() const { return lip_gamma_; }
    const Modulus& rho_dgamma() const { return rho_dgamma_; }
    /// D psi0 = (-gamma'(x1), 1), so its continuity modulus coincides with
    /// the graph gradient's.
    const Modulus& rho_dpsi0() const { return rho_dgamma_; }
    const std::string& name() const { return name_; }

    /// Projection-search distance to the boundary graph: dense scan of the
    /// foot parameter followed by golden-section refinement.
    double distance_to_boundary(Vec2 p, int scan_points = 400) const {
        const double w = std::max(1.0, 3.0 * std::abs(psi0(p)));
        auto d2 = [&](double s) { return (p - boundary_point(s)).squaredNorm(); };
        double best_s = p.x(), best = d2(p.x());
        for (int i = 0; i <= scan_points; ++i) {
            double s = p.x() - w + 2.0 * w * i / scan_points;
            double v = d2(s);
            if (v < best) {
                best = v;
                best_s = s;
            }
        }
        const double step = 2.0 * w / scan_points;
        auto [s_ref, v_ref] = golden_min(d2, best_s - step, best_s + step, 80);
        (void)s_ref;
        return std::sqrt(std::min(best, v_ref));
    }

private:
    std::function<double(double)> gamma_, dgamma_;
    Modulus rho_dgamma_;
    double b_;
    std::string name_;
    double lip_gamma_ = 0.0, K_ = 1.0, delta_ = 1.0;
};

inline GraphDomain GraphDomain::from_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "flat") return flat();
    if (family == "parabolic") return parabolic();
    if (family == "cosine")
        return cosine(j.value("amp", 0.1), j.value("freq", 2.0), j.value("halfwidth", 0.8));
    if (family == "table") {
        auto s = j.at("s").get<std::vector<double>>();
        auto g = j.at("gamma").get<std::vector<double>>();
        if (s.size() != g.size() || s.size() < 3)
            throw invalid_input("GraphDomain: bad sampled graph table");
        // piecewise-linear graph with centered-difference slope samples
        auto gfun = [s, g](double x) {
            auto it = std::upper_bound(s.begin(), s.end(), x);
            if (it == s.begin()) return g.front();
            if (it == s.end()) return g.back();
            std::size_t i = static_cast<std::size_t>(it - s.begin());
            double lam = (x - s[i - 1]) / (s[i] - s[i - 1]);
            return g[i - 1] + lam * (g[i] - g[i - 1]);
        };
        auto dfun = [s, g](double x) {
            auto it = std::upper_bound(s.begin(), s.end(), x);
            if (it == s.begin() || it == s.end()) return 0.0;
            std::size_t i = static_cast<std::size_t>(it - s.begin());
            return (g[i] - g[i - 1]) / (s[i] - s[i - 1]);
        };
        return GraphDomain(gfun, dfun, Modulus::power(1.0, 1.0, 1.0),
                           j.value("halfwidth", 0.5), "table");
    }
    throw invalid_input("GraphDomain: unknown family '" + family + "'");
}

}  // namespace dinireg
