#include <algorithm>
#include <cmath>

#include "safectl/errors.hpp"
#include "safectl/scenarios.hpp"

#include "params.hpp"

namespace safectl {

Scenario make_backup_brake(const ParamMap& overrides) {
    detail::ParamReader r(overrides);
    const double u_max = r.get("u_max", 1.0);
    const double wall = r.get("wall", 1.0);
    const double horizon = r.get("horizon", 2.0);
    const double flow_dt = r.get("flow_dt", 0.01);
    const double cruise_u = r.get("cruise_u", 0.5);
    // Braking ramps linearly to zero over |v| <= ramp_eps instead of switching
    // at v = 0: keeps the backup field Lipschitz, at the cost of a
    // ramp_eps^2/(2 u_max) offset in the stopping distance.
    const double ramp_eps = r.get("ramp_eps", 0.02);
    const double target = r.get("target", 0.8);
    const double p_relax = r.get("p_relax", 100.0);
    r.finish();

    if (!(u_max > 0.0)) throw InvalidArgument("backup_brake: u_max must be positive");

    Scenario sc;
    sc.name = "backup_brake";
    sc.description =
        "Double integrator driving at a wall with a brake-to-rest backup "
        "controller. The induced barrier has the closed form "
        "wall - p - v^2/(2 u_max) for v > 0, used as the module's oracle.";
    sc.state_names = {"p", "v"};

    sc.sys.n = 2;
    sc.sys.m = 1;
    sc.sys.f = [](const Vec& x) {
        Vec f(2);
        f << x(1), 0.0;
        return f;
    };
    sc.sys.g = [](const Vec&) {
        Mat g = Mat::Zero(2, 1);
        g(1, 0) = 1.0;
        return g;
    };
    Box u_box;
    u_box.lo = Vec::Constant(1, -u_max);
    u_box.hi = Vec::Constant(1, u_max);
    sc.sys.input_box = u_box;

    BackupCbf bc;
    bc.sys = sc.sys;
    bc.rho = [wall](const Vec& x) { return wall - x(0); };
    bc.grad_rho = [](const Vec&) {
        Vec grad(2);
        grad << -1.0, 0.0;
        return grad;
    };
    bc.beta = [u_max, ramp_eps](const Vec& x) {
        const double brake = std::clamp(x(1) / ramp_eps, 0.0, 1.0);
        return Vec::Constant(1, -u_max * brake);
    };
    bc.horizon_T = horizon;
    bc.flow_dt = flow_dt;
    bc.fd_step = 1e-4;
    bc.alpha = ExtendedClassKInf::linear(1.0);
    bc.validate();
    sc.backup = bc;

    sc.barriers = {as_barrier_spec(bc)};
    sc.h_names = {"h_backup"};

    const double eps = 0.5, k_lat = 1.0;
    LyapunovSpec lyap;
    lyap.V = [target, eps, k_lat](const Vec& x) {
        const double pt = x(0) - target;
        const double s = x(1) + eps * pt;
        return 0.5 * s * s + 0.5 * (k_lat - eps * eps) * pt * pt;
    };
    lyap.grad_V = [target, eps, k_lat](const Vec& x) {
        const double pt = x(0) - target;
        const double s = x(1) + eps * pt;
        Vec grad(2);
        grad << eps * s + (k_lat - eps * eps) * pt, s;
        return grad;
    };
    lyap.gamma = ExtendedClassKInf::linear(0.5);
    sc.lyapunov = lyap;

    sc.nominal = [cruise_u](double, const Vec&) { return Vec::Constant(1, cruise_u); };
    sc.p_relax = p_relax;

    sc.defaults.ctrl_dt = 1e-2;
    sc.defaults.duration = 10.0;
    sc.defaults.x0 = Vec(2);
    sc.defaults.x0 << 0.0, 0.5;

    auto sample = [](double p_, double v_) {
        Vec x(2);
        x << p_, v_;
        return x;
    };
    sc.diag_samples = {sample(0.0, 0.8), sample(0.3, 0.5), sample(-0.5, 1.0),
                       sample(0.2, -0.5)};

    sc.param_keys = r.keys();
    return sc;
}

}  // namespace safectl
