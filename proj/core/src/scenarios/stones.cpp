#include <cmath>

#include "safectl/errors.hpp"
#include "safectl/scenarios.hpp"

#include "params.hpp"

namespace safectl {

namespace {

constexpr double kSingularTol = 1e-9;

Eigen::Vector2d offset_checked(const Vec& x, double cx, double cy, const char* which) {
    Eigen::Vector2d d(x(0) - cx, x(1) - cy);
    if (d.norm() < kSingularTol) {
        throw SingularBarrierPoint(std::string("stones: foot position coincides with ") +
                                   which + " circle center");
    }
    return d;
}

/// Lie chain for s * (|F - O| - R) with s = +1 (stay outside) or -1 (stay
/// inside). On the double integrator:
///   hdot   = s (d . v) / |d|
///   L_f^2 h = s (|v|^2 - ((d . v)/|d|)^2) / |d|
///   L_g L_f h = s d^T / |d|
LieChain distance_chain(double cx, double cy, double R, double s, const char* which) {
    LieChain chain;
    chain.r = 2;
    chain.lf_powers = {
        [cx, cy, R, s, which](const Vec& x) {
            return s * (offset_checked(x, cx, cy, which).norm() - R);
        },
        [cx, cy, s, which](const Vec& x) {
            const Eigen::Vector2d d = offset_checked(x, cx, cy, which);
            return s * d.dot(x.tail<2>()) / d.norm();
        },
        [cx, cy, s, which](const Vec& x) {
            const Eigen::Vector2d d = offset_checked(x, cx, cy, which);
            const double dist = d.norm();
            const double radial = d.dot(x.tail<2>()) / dist;
            return s * (x.tail<2>().squaredNorm() - radial * radial) / dist;
        },
    };
    chain.lglf = [cx, cy, s, which](const Vec& x) {
        const Eigen::Vector2d d = offset_checked(x, cx, cy, which);
        Vec a(2);
        a << s * d(0) / d.norm(), s * d(1) / d.norm();
        return a;
    };
    return chain;
}

}  // namespace

StonesBarriers stones_barriers(const Vec& x, const StonesParams& p) {
    if (!(p.R1 > p.R2) || p.R2 < 0.0) {
        throw InvalidArgument("stones: need R1 > R2 >= 0");
    }
    StonesBarriers out;
    out.chain1 = distance_chain(p.o1x, p.o1y, p.R1, -1.0, "outer");
    out.chain2 = distance_chain(p.o2x, p.o2y, p.R2, +1.0, "inner");
    out.h1 = out.chain1.h(x);
    out.h2 = out.chain2.h(x);
    return out;
}

Scenario make_stones(const ParamMap& overrides) {
    detail::ParamReader r(overrides);
    StonesParams p;
    p.o1x = r.get("o1x", 0.0);
    p.o1y = r.get("o1y", 0.0);
    p.o2x = r.get("o2x", 0.0);
    p.o2y = r.get("o2y", 0.0);
    p.R1 = r.get("r1", 1.0);
    p.R2 = r.get("r2", 0.4);
    const double pole1 = r.get("pole1", 2.0);
    const double pole2 = r.get("pole2", 4.0);
    const double u_max = r.get("u_max", 3.0);
    const double tgt_x = r.get("target_x", 0.7);
    const double tgt_y = r.get("target_y", 0.0);
    const double p_relax = r.get("p_relax", 100.0);
    r.finish();

    if (!(p.R1 > p.R2) || p.R2 < 0.0) {
        throw InvalidArgument("stones: need R1 > R2 >= 0");
    }

    Scenario sc;
    sc.name = "stones";
    sc.description =
        "Stepping-stones analog: a planar double-integrator swing foot crosses an "
        "annulus (inside the outer circle, outside the inner one). Both barriers "
        "have relative degree 2 and are enforced through their ECBF rows.";
    sc.state_names = {"p_x", "p_y", "v_x", "v_y"};

    sc.sys.n = 4;
    sc.sys.m = 2;
    sc.sys.f = [](const Vec& x) {
        Vec f(4);
        f << x(2), x(3), 0.0, 0.0;
        return f;
    };
    sc.sys.g = [](const Vec&) {
        Mat g = Mat::Zero(4, 2);
        g(2, 0) = 1.0;
        g(3, 1) = 1.0;
        return g;
    };
    Box u_box;
    u_box.lo = Vec::Constant(2, -u_max);
    u_box.hi = Vec::Constant(2, u_max);
    sc.sys.input_box = u_box;

    Vec poles(2);
    poles << pole1, pole2;
    sc.designs = {
        make_ecbf_design(distance_chain(p.o1x, p.o1y, p.R1, -1.0, "outer"), poles),
        make_ecbf_design(distance_chain(p.o2x, p.o2y, p.R2, +1.0, "inner"), poles),
    };
    sc.h_names = {"h1", "h2"};

    // Same exact-CLF construction as acc_lk's lateral part, about the target.
    const double eps = 0.5, k_lat = 1.0, gamma_c = 0.5;
    LyapunovSpec lyap;
    lyap.V = [tgt_x, tgt_y, eps, k_lat](const Vec& x) {
        const Eigen::Vector2d pt(x(0) - tgt_x, x(1) - tgt_y);
        const Eigen::Vector2d s = x.tail<2>() + eps * pt;
        return 0.5 * s.squaredNorm() + 0.5 * (k_lat - eps * eps) * pt.squaredNorm();
    };
    lyap.grad_V = [tgt_x, tgt_y, eps, k_lat](const Vec& x) {
        const Eigen::Vector2d pt(x(0) - tgt_x, x(1) - tgt_y);
        const Eigen::Vector2d s = x.tail<2>() + eps * pt;
        Vec grad(4);
        grad.head<2>() = eps * s + (k_lat - eps * eps) * pt;
        grad.tail<2>() = s;
        return grad;
    };
    lyap.gamma = ExtendedClassKInf::linear(gamma_c);
    sc.lyapunov = lyap;

    sc.nominal = [tgt_x, tgt_y](double, const Vec& x) {
        Vec u(2);
        u << -1.0 * (x(0) - tgt_x) - 1.4 * x(2),
            -1.0 * (x(1) - tgt_y) - 1.4 * x(3);
        return u;
    };

    sc.p_relax = p_relax;

    sc.defaults.ctrl_dt = 1e-3;
    sc.defaults.duration = 10.0;
    sc.defaults.x0 = Vec(4);
    // Slightly off-axis start: the straight line to the target passes through
    // the inner circle, so the filter must steer around it.
    sc.defaults.x0 << -0.7, 0.05, 0.0, 0.0;

    auto sample = [](double px, double py, double vx, double vy) {
        Vec x(4);
        x << px, py, vx, vy;
        return x;
    };
    sc.diag_samples = {
        sample(0.7, 0.1, 0.2, -0.1),
        sample(-0.5, 0.3, 0.5, 0.2),
        sample(0.1, 0.7, -0.3, 0.1),
        sample(-0.6, -0.4, 0.3, 0.4),
    };

    sc.param_keys = r.keys();
    return sc;
}

}  // namespace safectl
