#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dinireg/common.hpp"

namespace dinireg {

/// Uniform tensor grid of nodes over an axis-aligned box.
struct GridSpec {
    double ax = 0.0, bx = 1.0, ay = 0.0, by = 1.0;
    int nx = 2, ny = 2;  // node counts per axis

    double hx() const { return (bx - ax) / (nx - 1); }
    double hy() const { return (by - ay) / (ny - 1); }
    double x(int i) const { return ax + i * hx(); }
    double y(int j) const { return ay + j * hy(); }
    Vec2 node(int i, int j) const { return {x(i), y(j)}; }
    int index(int i, int j) const { return j * nx + i; }
    int size() const { return nx * ny; }
    bool valid() const { return nx >= 2 && ny >= 2 && bx > ax && by > ay; }
};

/// Grid-sampled scalar function with bilinear interpolation and finite
/// difference derivatives (central inside, one-sided second order at the
/// edges).  Values outside the box clamp to the nearest node, which doubles
/// as the nearest-value extension used by the mollification routines.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(GridSpec g, std::vector<double> values) : g_(g), v_(std::move(values)) {
        if (!g_.valid() || static_cast<int>(v_.size()) != g_.size())
            throw invalid_input("ScalarField: grid/value size mismatch");
    }
    static ScalarField sample(GridSpec g, const std::function<double(Vec2)>& f) {
        std::vector<double> v(g.size());
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) v[g.index(i, j)] = f(g.node(i, j));
        return ScalarField(g, std::move(v));
    }
    static ScalarField constant(GridSpec g, double c) {
        return ScalarField(g, std::vector<double>(g.size(), c));
    }

    const GridSpec& grid() const { return g_; }
    double at(int i, int j) const { return v_[g_.index(i, j)]; }
    double& at(int i, int j) { return v_[g_.index(i, j)]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    double operator()(Vec2 p) const {
        auto [i, j, s, t] = locate(p);
        const double v00 = at(i, j), v10 = at(i + 1, j);
        const double v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
        return (1 - s) * (1 - t) * v00 + s * (1 - t) * v10 + (1 - s) * t * v01 + s * t * v11;
    }

    /// Node finite-difference gradient.
    Vec2 gradient_at(int i, int j) const {
        return {dx_node(i, j), dy_node(i, j)};
    }
    Vec2 gradient(Vec2 p) const {
        auto [i, j, s, t] = locate(p);
        auto gv = [&](int ii, int jj) { return gradient_at(ii, jj); };
        Vec2 g00 = gv(i, j), g10 = gv(i + 1, j), g01 = gv(i, j + 1), g11 = gv(i + 1, j + 1);
        return (1 - s) * (1 - t) * g00 + s * (1 - t) * g10 + (1 - s) * t * g01 + s * t * g11;
    }

    /// Node finite-difference Hessian (symmetrized cross term).
    Mat2 hessian_at(int i, int j) const {
        Mat2 h;
        h(0, 0) = dxx_node(i, j);
        h(1, 1) = dyy_node(i, j);
        h(0, 1) = h(1, 0) = dxy_node(i, j);
        return h;
    }
    Mat2 hessian(Vec2 p) const {
        auto [i, j, s, t] = locate(p);
        Mat2 h = (1 - s) * (1 - t) * hessian_at(i, j) + s * (1 - t) * hessian_at(i + 1, j) +
                 (1 - s) * t * hessian_at(i, j + 1) + s * t * hessian_at(i + 1, j + 1);
        return h;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    struct Loc {
        int i, j;
        double s, t;
    };
    Loc locate(Vec2 p) const {
        double fx = (p.x() - g_.ax) / g_.hx();
        double fy = (p.y() - g_.ay) / g_.hy();
        fx = std::clamp(fx, 0.0, static_cast<double>(g_.nx - 1));
        fy = std::clamp(fy, 0.0, static_cast<double>(g_.ny - 1));
        int i = std::min(static_cast<int>(fx), g_.nx - 2);
        int j = std::min(static_cast<int>(fy), g_.ny - 2);
        return {i, j, fx - i, fy - j};
    }

    double dx_node(int i, int j) const {
        const double h = g_.hx();
        if (i == 0) return (-3 * at(0, j) + 4 * at(1, j) - at(2, j)) / (2 * h);
        if (i == g_.nx - 1)
            return (3 * at(i, j) - 4 * at(i - 1, j) + at(i - 2, j)) / (2 * h);
        return (at(i + 1, j) - at(i - 1, j)) / (2 * h);
    }
    double dy_node(int i, int j) const {
        const double h = g_.hy();
        if (j == 0) return (-3 * at(i, 0) + 4 * at(i, 1) - at(i, 2)) / (2 * h);
        if (j == g_.ny - 1)
            return (3 * at(i, j) - 4 * at(i, j - 1) + at(i, j - 2)) / (2 * h);
        return (at(i, j + 1) - at(i, j - 1)) / (2 * h);
    }
    double dxx_node(int i, int j) const {
        const double h2 = sqr(g_.hx());
        int ii = std::clamp(i, 1, g_.nx - 2);
        return (at(ii + 1, j) - 2 * at(ii, j) + at(ii - 1, j)) / h2;
    }
    double dyy_node(int i, int j) const {
        const double h2 = sqr(g_.hy());
        int jj = std::clamp(j, 1, g_.ny - 2);
        return (at(i, jj + 1) - 2 * at(i, jj) + at(i, jj - 1)) / h2;
    }
    double dxy_node(int i, int j) const {
        int ii = std::clamp(i, 1, g_.nx - 2);
        int jj = std::clamp(j, 1, g_.ny - 2);
        return (at(ii + 1, jj + 1) - at(ii + 1, jj - 1) - at(ii - 1, jj + 1) +
                at(ii - 1, jj - 1)) /
               (4 * g_.hx() * g_.hy());
    }

    GridSpec g_;
    std::vector<double> v_;
};

struct VectorField {
    ScalarField x, y;
    Vec2 operator()(Vec2 p) const { return {x(p), y(p)}; }
    static VectorField sample(GridSpec g, const std::function<Vec2(Vec2)>& f) {
        return {ScalarField::sample(g, [&](Vec2 p) { return f(p).x(); }),
                ScalarField::sample(g, [&](Vec2 p) { return f(p).y(); })};
    }
};

/// 2x2 matrix field; stores all four entries, callers may assert symmetry.
struct MatrixField {
    ScalarField a11, a12, a21, a22;
    bool symmetric = true;
    Mat2 operator()(Vec2 p) const {
        Mat2 m;
        m << a11(p), a12(p), a21(p), a22(p);
        return m;
    }
    static MatrixField sample(GridSpec g, const std::function<Mat2(Vec2)>& f, bool sym = true) {
        return {ScalarField::sample(g, [&](Vec2 p) { return f(p)(0, 0); }),
                ScalarField::sample(g, [&](Vec2 p) { return f(p)(0, 1); }),
                ScalarField::sample(g, [&](Vec2 p) { return f(p)(1, 0); }),
                ScalarField::sample(g, [&](Vec2 p) { return f(p)(1, 1); }), sym};
    }
};

}  // namespace dinireg
