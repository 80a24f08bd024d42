#pragma once

#include <cmath>
#include <stdexcept>

namespace chamberflow {

// Loss-free hyperbolic evaluators for gap arguments u > 0. The potential and
// field formulas consume gaps u = d - beta(w) that range from ~1e-12 (near a
// wall) to several hundred (deep interior of an unbounded chamber); the
// expm1-based forms keep full relative accuracy at both ends and never
// overflow, where naive sinh/cosh blow up past u ~ 710.

inline constexpr double kMinGap = 1e-12;

struct NearWallError : std::domain_error {
    using std::domain_error::domain_error;
};

// coth(u) for u > 0. Errors out below kMinGap instead of returning inf;
// near-wall asymptotics are the flow integrator's job, not the field's.
inline double coth_pos(double u) {
    if (!(u >= kMinGap)) {
        throw NearWallError("coth: gap below 1e-12 (point too close to a wall)");
    }
    return 1.0 + 2.0 / std::expm1(2.0 * u);
}

// tanh on the whole line; minus-branch gaps may be negative inside the chamber.
inline double tanh_any(double u) { return std::tanh(u); }

// log(sinh(u)) for u > 0 without overflow.
inline double log_sinh_pos(double u) {
    if (!(u >= kMinGap)) {
        throw NearWallError("log_sinh: gap below 1e-12 (point too close to a wall)");
    }
    if (u < 1.0) return std::log(std::sinh(u));
    return u + std::log1p(-std::exp(-2.0 * u)) - M_LN2;
}

// log(cosh(u)) for any u.
inline double log_cosh(double u) {
    const double a = std::fabs(u);
    if (a < 1.0) return std::log(std::cosh(a));
    return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

// 1 / sinh(u)^2 for u > 0 without intermediate overflow.
inline double inv_sinh_sq(double u) {
    if (!(u >= kMinGap)) {
        throw NearWallError("inv_sinh_sq: gap below 1e-12 (point too close to a wall)");
    }
    if (u > 350.0) return 4.0 * std::exp(-2.0 * u);
    const double s = std::sinh(u);
    return 1.0 / (s * s);
}

// 1 / cosh(u)^2 = sech^2, any u.
inline double inv_cosh_sq(double u) {
    const double c = std::cosh(std::fabs(u) > 350.0 ? 350.0 : u);
    if (std::fabs(u) > 350.0) return 4.0 * std::exp(-2.0 * std::fabs(u));
    return 1.0 / (c * c);
}

}  // namespace chamberflow
