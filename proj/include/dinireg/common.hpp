#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dinireg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Thrown when an input violates a documented precondition (bad parameter,
/// non-monotone table, ellipticity violation, ...).
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numeric procedure fails to meet its own convergence
/// contract (fixed point stalls, resolution floor hit, singular system).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double sqr(double x) { return x * x; }

/// FNV-1a 64-bit hash of a byte string (stable across runs and platforms).
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline bool approx_eq(double a, double b, double tol) {
    return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}

}  // namespace dinireg
