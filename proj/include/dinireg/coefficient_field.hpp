#pragma once

#include <cmath>
#include <functional>

#include "dinireg/flatten.hpp"  // ScalarFn/VectorFn/MatrixFn
#include "dinireg/grid_field.hpp"

namespace dinireg {

/// Coefficient bundle for the second-order operators.  lambda/Lambda are
/// the ellipticity and boundedness constants; validate() checks them at the
/// nodes of a grid.  The divergence-form operator uses (A, a_vec, a0, b_vec, c);
/// the nondivergence operator uses (A symmetric, b_vec, c).
struct CoefficientField {
    MatrixFn A = [](Vec2) { return Mat2::Identity(); };
    VectorFn a_vec = [](Vec2) { return Vec2::Zero().eval(); };
    ScalarFn a0 = [](Vec2) { return 0.0; };
    VectorFn b_vec = [](Vec2) { return Vec2::Zero().eval(); };
    ScalarFn c = [](Vec2) { return 0.0; };
    double lambda = 1.0, Lambda = 2.0;
    bool symmetric = true;

    void validate(const GridSpec& g) const {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                Mat2 m = A(g.node(i, j));
                if (symmetric && std::abs(m(0, 1) - m(1, 0)) > 1e-12)
                    throw invalid_input("CoefficientField: matrix not symmetric at a node");
                Mat2 s = 0.5 * (m + m.transpose());
                double tr = s.trace(), det = s.determinant();
                double lam_min = tr / 2.0 - std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
                if (lam_min < lambda - 1e-9)
                    throw invalid_input("CoefficientField: ellipticity violated at a node");
                if (m.squaredNorm() > Lambda * Lambda + 1e-9)
                    throw invalid_input("CoefficientField: boundedness violated at a node");
            }
    }
};

}  // namespace dinireg
