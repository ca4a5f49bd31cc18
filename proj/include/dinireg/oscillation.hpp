#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dinireg/grid_field.hpp"
#include "dinireg/modulus.hpp"

namespace dinireg {

using RegionPredicate = std::function<bool(Vec2)>;

inline RegionPredicate whole_plane() {
    return [](Vec2) { return true; };
}

/// Raw-plus-envelope empirical modulus: mean oscillation need not be
/// monotone, so the raw table is kept and a running-max envelope is what
/// downstream transforms consume.
struct OscillationTable {
    std::vector<double> radii;
    std::vector<double> raw;
    Modulus envelope;  // monotone
    int centers_used = 0;
};

namespace detail {

inline int auto_stride(int n_nodes, int target) {
    int s = 1;
    while (n_nodes / (s * s) > target) ++s;
    return s;
}

}  // namespace detail

/// Supremum over ball centers of the L1-mean deviation of f from its ball
/// average, balls clipped to the region.  Centers run over a strided node
/// lattice including near-boundary nodes whose clipped ball still meets the
/// region.
inline OscillationTable empirical_mean_oscillation(const ScalarField& f,
                                                   const RegionPredicate& inside,
                                                   std::vector<double> radii,
                                                   int center_stride = 0,
                                                   int min_ball_nodes = 5) {
    const GridSpec& g = f.grid();
    const double h = std::max(g.hx(), g.hy());
    std::sort(radii.begin(), radii.end());
    if (radii.empty() || radii.front() < 4.0 * h)
        throw numeric_error("empirical_mean_oscillation: radius below 4 grid cells");
    if (center_stride <= 0) center_stride = detail::auto_stride(g.size(), 4000);

    OscillationTable out;
    out.radii = radii;
    out.raw.assign(radii.size(), 0.0);

    std::vector<char> in(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) in[g.index(i, j)] = inside(g.node(i, j)) ? 1 : 0;

    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double r = radii[k];
        const int ri = static_cast<int>(std::ceil(r / g.hx()));
        const int rj = static_cast<int>(std::ceil(r / g.hy()));
        double sup = 0.0;
        int used = 0;
        for (int cj = 0; cj < g.ny; cj += center_stride) {
            for (int ci = 0; ci < g.nx; ci += center_stride) {
                const Vec2 c = g.node(ci, cj);
                double sum = 0.0;
                int n = 0;
                for (int j = std::max(0, cj - rj); j <= std::min(g.ny - 1, cj + rj); ++j)
                    for (int i = std::max(0, ci - ri); i <= std::min(g.nx - 1, ci + ri); ++i) {
                        if (!in[g.index(i, j)]) continue;
                        if ((g.node(i, j) - c).norm() > r) continue;
                        sum += f.at(i, j);
                        ++n;
                    }
                if (n < min_ball_nodes) continue;
                const double mean = sum / n;
                double dev = 0.0;
                for (int j = std::max(0, cj - rj); j <= std::min(g.ny - 1, cj + rj); ++j)
                    for (int i = std::max(0, ci - ri); i <= std::min(g.nx - 1, ci + ri); ++i) {
                        if (!in[g.index(i, j)]) continue;
                        if ((g.node(i, j) - c).norm() > r) continue;
                        dev += std::abs(f.at(i, j) - mean);
                    }
                sup = std::max(sup, dev / n);
                ++used;
            }
        }
        out.raw[k] = sup;
        out.centers_used = std::max(out.centers_used, used);
    }

    std::vector<double> env = out.raw;
    for (std::size_t k = 1; k < env.size(); ++k) env[k] = std::max(env[k], env[k - 1]);
    out.envelope = Modulus::table(radii, env);
    return out;
}

/// Pairwise supremum modulus of continuity binned by distance; monotone by
/// construction (prefix max over bins).
inline OscillationTable empirical_continuity_modulus(const ScalarField& f,
                                                     const RegionPredicate& inside,
                                                     std::vector<double> radii,
                                                     int sample_stride = 0) {
    const GridSpec& g = f.grid();
    const double h = std::max(g.hx(), g.hy());
    std::sort(radii.begin(), radii.end());
    if (radii.empty() || radii.front() < 4.0 * h)
        throw numeric_error("empirical_continuity_modulus: radius below 4 grid cells");
    if (sample_stride <= 0) sample_stride = detail::auto_stride(g.size(), 2500);

    struct Pt {
        Vec2 p;
        double v;
    };
    std::vector<Pt> pts;
    for (int j = 0; j < g.ny; j += sample_stride)
        for (int i = 0; i < g.nx; i += sample_stride)
            if (inside(g.node(i, j))) pts.push_back({g.node(i, j), f.at(i, j)});

    OscillationTable out;
    out.radii = radii;
    out.raw.assign(radii.size(), 0.0);
    const double rmax = radii.back();
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double d = (pts[a].p - pts[b].p).norm();
            if (d > rmax) continue;
            auto it = std::lower_bound(radii.begin(), radii.end(), d);
            const std::size_t k = static_cast<std::size_t>(it - radii.begin());
            if (k >= radii.size()) continue;
            out.raw[k] = std::max(out.raw[k], std::abs(pts[a].v - pts[b].v));
        }
    for (std::size_t k = 1; k < out.raw.size(); ++k)
        out.raw[k] = std::max(out.raw[k], out.raw[k - 1]);
    out.envelope = Modulus::table(radii, out.raw);
    out.centers_used = static_cast<int>(pts.size());
    return out;
}

/// Per-radius comparison of the measured mean oscillation of a product fg
/// against the bound |f|_inf w_g(r) + |g|_inf rho_f(r).
struct ProductOscillationRow {
    double r, measured, bound, slack;
};
struct ProductOscillationReport {
    std::vector<ProductOscillationRow> rows;
    bool pass = true;
};

inline ProductOscillationReport product_oscillation_check(const ScalarField& f,
                                                          const ScalarField& g_field,
                                                          const RegionPredicate& inside,
                                                          const std::vector<double>& radii,
                                                          double tol = 0.05) {
    const GridSpec& g = f.grid();
    ScalarField fg(g, {});
    {
        std::vector<double> v(g.size());
        for (int i = 0; i < g.size(); ++i) v[i] = f.values()[i] * g_field.values()[i];
        fg = ScalarField(g, std::move(v));
    }
    auto osc_fg = empirical_mean_oscillation(fg, inside, radii);
    auto osc_g = empirical_mean_oscillation(g_field, inside, radii);
    auto rho_f = empirical_continuity_modulus(f, inside, radii);

    double f_inf = 0.0, g_inf = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (inside(g.node(i, j))) {
                f_inf = std::max(f_inf, std::abs(f.at(i, j)));
                g_inf = std::max(g_inf, std::abs(g_field.at(i, j)));
            }

    ProductOscillationReport rep;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        ProductOscillationRow row;
        row.r = osc_fg.radii[k];
        row.measured = osc_fg.raw[k];
        row.bound = f_inf * osc_g.raw[k] + g_inf * rho_f.raw[k];
        row.slack = row.bound * (1.0 + tol) - row.measured;
        rep.pass = rep.pass && row.slack >= 0.0;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace dinireg
