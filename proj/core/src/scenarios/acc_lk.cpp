#include <cmath>

#include "safectl/errors.hpp"
#include "safectl/scenarios.hpp"

#include "params.hpp"

namespace safectl {

namespace {

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double h_asr(const Vec& x, const AccParams& p) {
    // state (p_f, v_f, y_lat, v_lat, s_l, v_l); D = s_l - p_f
    return (x(4) - x(0)) - p.tau_hw * x(1);
}

double h_lk(double y_lat, double v_lat, const LaneKeepParams& p) {
    return p.d_max - sign0(v_lat) * y_lat - 0.5 * v_lat * v_lat / p.a_max;
}

Scenario make_acc_lk(const ParamMap& overrides) {
    detail::ParamReader r(overrides);
    AccParams acc;
    acc.tau_hw = r.get("tau_headway", 1.8);
    acc.lead_v = r.get("lead_v", 8.0);
    acc.lead_x0 = r.get("lead_x0", 20.0);
    const double lead_dv = r.get("lead_dv", -3.0);
    const double lead_dv_time = r.get("lead_dv_time", 5.0);

    LaneKeepParams lk;
    lk.d_max = r.get("d_max", 1.0);
    // The barrier budgets a fraction of the physical lateral authority; the
    // reserve absorbs zero-order-hold effects at the lane boundary.
    const double a_max_box = r.get("a_max", 2.0);
    const double brake_frac = r.get("brake_frac", 0.9);
    lk.a_max = brake_frac * a_max_box;

    const double mass = r.get("mass", 1.0);
    const double u_long_max = r.get("u_long_max", 3.0);
    const double v_d = r.get("v_d", 11.0);
    const double y_ref_amp = r.get("y_ref_amp", 1.3);
    const double y_ref_freq = r.get("y_ref_freq", 0.5);
    const double p_relax = r.get("p_relax", 100.0);
    r.finish();

    if (!(acc.tau_hw > 0.0) || acc.lead_v < 0.0) {
        throw InvalidArgument("acc_lk: need tau_headway > 0 and lead_v >= 0");
    }
    if (!(lk.d_max > 0.0) || !(lk.a_max > 0.0)) {
        throw InvalidArgument("acc_lk: need d_max > 0 and a_max > 0");
    }

    Scenario sc;
    sc.name = "acc_lk";
    sc.description =
        "Adaptive cruise control + lane keeping: follower (longitudinal + lateral "
        "double integrators) behind a constant-speed lead that brakes mid-run. "
        "h_asr enforces the time headway, h_lk the lane boundary.";
    sc.state_names = {"p_f", "v_f", "y_lat", "v_lat", "s_l", "v_l"};

    sc.sys.n = 6;
    sc.sys.m = 2;
    sc.sys.f = [](const Vec& x) {
        Vec f(6);
        f << x(1), 0.0, x(3), 0.0, x(5), 0.0;
        return f;
    };
    sc.sys.g = [mass](const Vec&) {
        Mat g = Mat::Zero(6, 2);
        g(1, 0) = 1.0 / mass;
        g(3, 1) = 1.0;
        return g;
    };
    Box u_box;
    u_box.lo = Vec(2);
    u_box.hi = Vec(2);
    u_box.lo << -u_long_max, -a_max_box;
    u_box.hi << u_long_max, a_max_box;
    sc.sys.input_box = u_box;

    BarrierSpec asr;
    asr.h = [acc](const Vec& x) { return h_asr(x, acc); };
    asr.grad_h = [acc](const Vec&) {
        Vec grad(6);
        grad << -1.0, -acc.tau_hw, 0.0, 0.0, 1.0, 0.0;
        return grad;
    };
    asr.alpha = ExtendedClassKInf::linear(1.0);

    BarrierSpec lane;
    lane.h = [lk](const Vec& x) { return h_lk(x(2), x(3), lk); };
    lane.grad_h = [lk](const Vec& x) {
        Vec grad = Vec::Zero(6);
        grad(2) = -sign0(x(3));
        grad(3) = -x(3) / lk.a_max;
        return grad;
    };
    lane.alpha = ExtendedClassKInf::linear(1.0);

    sc.barriers = {asr, lane};
    sc.h_names = {"h_asr", "h_lk"};

    // Exact CLF: speed tracking plus the (v + eps p, p) lateral form. With
    // eps = 0.5, k = 1, gamma = 0.5 V the decay condition holds even where
    // L_g V = 0 (there Vdot = -eps (k - eps^2) y^2 dominates gamma(V)).
    const double eps = 0.5, k_lat = 1.0, gamma_c = 0.5;
    LyapunovSpec lyap;
    lyap.V = [v_d, eps, k_lat](const Vec& x) {
        const double ev = x(1) - v_d;
        const double s = x(3) + eps * x(2);
        return 0.5 * ev * ev + 0.5 * s * s + 0.5 * (k_lat - eps * eps) * x(2) * x(2);
    };
    lyap.grad_V = [v_d, eps, k_lat](const Vec& x) {
        const double s = x(3) + eps * x(2);
        Vec grad = Vec::Zero(6);
        grad(1) = x(1) - v_d;
        grad(2) = eps * s + (k_lat - eps * eps) * x(2);
        grad(3) = s;
        return grad;
    };
    lyap.gamma = ExtendedClassKInf::linear(gamma_c);
    sc.lyapunov = lyap;

    sc.nominal = [v_d, y_ref_amp, y_ref_freq](double t, const Vec& x) {
        const double y_ref = y_ref_amp * std::sin(y_ref_freq * t);
        const double vy_ref = y_ref_amp * y_ref_freq * std::cos(y_ref_freq * t);
        Vec u(2);
        u << 2.0 * (v_d - x(1)),
            4.0 * (y_ref - x(2)) + 3.0 * (vy_ref - x(3));
        return u;
    };

    sc.p_relax = p_relax;

    sc.defaults.ctrl_dt = 1e-3;
    sc.defaults.duration = 10.0;
    sc.defaults.x0 = Vec(6);
    sc.defaults.x0 << 0.0, acc.lead_v, 0.0, 0.0, acc.lead_x0, acc.lead_v;

    if (lead_dv != 0.0) {
        DisturbanceEvent ev;
        ev.t = lead_dv_time;
        ev.delta = Vec::Zero(6);
        ev.delta(5) = lead_dv;
        ev.label = "lead_slowdown";
        sc.events.push_back(ev);
    }

    // |v_lat| kept >= 0.3: sign(v_lat) makes h_lk nonsmooth at v_lat = 0.
    auto sample = [](double pf, double vf, double y, double vy, double sl, double vl) {
        Vec x(6);
        x << pf, vf, y, vy, sl, vl;
        return x;
    };
    sc.diag_samples = {
        sample(0.0, 8.0, 0.2, 0.5, 20.0, 8.0),
        sample(5.0, 9.0, -0.3, -0.8, 30.0, 8.0),
        sample(12.0, 7.5, 0.5, 1.0, 28.0, 5.0),
        sample(3.0, 10.0, -0.6, 0.4, 18.0, 6.0),
    };

    sc.param_keys = r.keys();
    return sc;
}

}  // namespace safectl
