#include <cmath>

#include "safectl/errors.hpp"
#include "safectl/scenarios.hpp"

namespace safectl {

ControlAffineSystem unicycle_system(const UnicycleParams& p) {
    if (!(p.m > 0.0) || !(p.I_z > 0.0)) {
        throw InvalidArgument("unicycle: m and I_z must be positive");
    }
    // a = 0 (tracked point on the wheel-base center) is allowed: the
    // kinematic-consistency check relies on it.
    if (p.a < 0.0) throw InvalidArgument("unicycle: a must be nonnegative");

    ControlAffineSystem s;
    s.n = 5;
    s.m = 2;
    s.f = [p](const Vec& x) {
        const double v = x(2), psi = x(3), w = x(4);
        Vec f(5);
        f << v * std::cos(psi) - p.a * w * std::sin(psi),
            v * std::sin(psi) + p.a * w * std::cos(psi),
            -p.a * w * w,
            w,
            0.0;
        return f;
    };
    s.g = [p](const Vec&) {
        Mat g = Mat::Zero(5, 2);
        g(2, 0) = 1.0 / p.m;    // longitudinal force
        g(4, 1) = 1.0 / p.I_z;  // angular torque
        return g;
    };
    return s;
}

}  // namespace safectl
