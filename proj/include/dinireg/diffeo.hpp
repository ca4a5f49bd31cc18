#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "dinireg/common.hpp"

namespace dinireg {

/// A pair of mutually inverse coordinate maps with derivative evaluators.
/// forward/inverse compose to the identity on the validity box to 1e-8;
/// the jacobian refers to the forward map and must stay away from
/// singularity on the box.
struct DiffeoMap {
    std::function<Vec2(Vec2)> forward;   // x -> z
    std::function<Vec2(Vec2)> inverse;   // z -> x
    std::function<Mat2(Vec2)> jacobian;  // D forward at x

    struct Box {
        Vec2 lo{0, 0}, hi{0, 0};
        bool contains(Vec2 p) const {
            return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
        }
    };
    Box validity;

    /// Second derivatives of forward component k: FD of the jacobian.
    std::array<Mat2, 2> second_derivative(Vec2 x, double h = 1e-4) const {
        Mat2 jxp = jacobian(x + Vec2{h, 0}), jxm = jacobian(x - Vec2{h, 0});
        Mat2 jyp = jacobian(x + Vec2{0, h}), jym = jacobian(x - Vec2{0, h});
        std::array<Mat2, 2> out;
        for (int k = 0; k < 2; ++k) {
            Mat2 H;
            H(0, 0) = (jxp(k, 0) - jxm(k, 0)) / (2 * h);
            H(0, 1) = (jyp(k, 0) - jym(k, 0)) / (2 * h);
            H(1, 0) = (jxp(k, 1) - jxm(k, 1)) / (2 * h);
            H(1, 1) = (jyp(k, 1) - jym(k, 1)) / (2 * h);
            // symmetrize the mixed entries
            double m = 0.5 * (H(0, 1) + H(1, 0));
            H(0, 1) = H(1, 0) = m;
            out[k] = H;
        }
        return out;
    }

    double roundtrip_error(const std::vector<Vec2>& pts) const {
        double worst = 0.0;
        for (Vec2 p : pts) worst = std::max(worst, (inverse(forward(p)) - p).norm());
        return worst;
    }
};

}  // namespace dinireg
