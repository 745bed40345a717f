#pragma once

#include <functional>

#include "safectl/system.hpp"

namespace safectl {

using VectorField = std::function<Vec(const Vec&)>;

/// One classical RK4 step for xdot = field(x). dt may be negative (backward
/// integration, used by the numerical chain checks).
inline Vec rk4_step(const VectorField& field, const Vec& x, double dt) {
    const Vec k1 = field(x);
    const Vec k2 = field(x + 0.5 * dt * k1);
    const Vec k3 = field(x + 0.5 * dt * k2);
    const Vec k4 = field(x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace safectl
