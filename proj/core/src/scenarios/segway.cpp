#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "safectl/errors.hpp"
#include "safectl/scenarios.hpp"

#include "params.hpp"

namespace safectl {

namespace {

struct SegwayMatrices {
    Mat A;  // 3x3
    Vec B;  // 3
};

SegwayMatrices segway_matrices(const SegwayLiteParams& p) {
    const double ct = p.c_phi / (p.m_p * p.l);
    const double drag = p.k_m * p.k_b + p.c_v;
    SegwayMatrices m;
    m.A = Mat::Zero(3, 3);
    m.A.row(0) << -drag / p.M, -p.m_p * p.g0 / p.M, p.m_p * ct / p.M;
    m.A.row(1) << 0.0, 0.0, 1.0;
    m.A.row(2) << drag / (p.M * p.l), (p.M + p.m_p) * p.g0 / (p.M * p.l),
        -(p.M + p.m_p) * ct / (p.M * p.l);
    m.B = Vec(3);
    m.B << p.k_m / p.M, 0.0, -p.k_m / (p.M * p.l);
    return m;
}

/// Quadratic CLF V = x'Px from the closed loop under u = K_fb x: P solves
/// Acl'P + P Acl = -I (Kronecker-vectorized 9x9 solve), so along u = K_fb x,
/// Vdot = -|x|^2 <= -(1/lmax(P)) V — a valid decay rate even where L_g V = 0.
LyapunovSpec quadratic_clf(const Mat& A, const Vec& B, const RowVec& K_fb) {
    const int n = static_cast<int>(A.rows());
    const Mat Acl = A + B * K_fb;
    const Eigen::EigenSolver<Mat> es(Acl);
    for (int i = 0; i < n; ++i) {
        if (es.eigenvalues()(i).real() >= 0.0) {
            throw InvalidArgument("quadratic_clf: feedback is not stabilizing");
        }
    }

    Mat M = Mat::Zero(n * n, n * n);  // vec(Acl'P + P Acl) = M vec(P)
    const Mat At = Acl.transpose();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                M(i + n * j, k + n * j) += At(i, k);  // left multiply by Acl'
                M(i + n * j, i + n * k) += At(j, k);  // right multiply by Acl
            }
        }
    }
    Vec rhs = Vec::Zero(n * n);
    for (int i = 0; i < n; ++i) rhs(i + n * i) = -1.0;
    const Vec pv = M.fullPivLu().solve(rhs);

    Mat P(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) P(i, j) = pv(i + n * j);
    }
    P = 0.5 * (P + P.transpose());
    const Eigen::SelfAdjointEigenSolver<Mat> ps(P);
    if (ps.eigenvalues().minCoeff() <= 0.0) {
        throw NumericalFailure("quadratic_clf: Lyapunov solution not positive definite");
    }
    // Vdot = -|x|^2 and V <= lmax(P)|x|^2; keep 90% of the certified rate.
    const double decay = 0.9 / ps.eigenvalues().maxCoeff();

    LyapunovSpec lyap;
    lyap.V = [P](const Vec& x) { return x.dot(P * x); };
    lyap.grad_V = [P](const Vec& x) { return Vec(2.0 * P * x); };
    lyap.gamma = ExtendedClassKInf::linear(decay);
    return lyap;
}

ControlAffineSystem make_system(const SegwayLiteParams& p) {
    const SegwayMatrices m = segway_matrices(p);
    ControlAffineSystem s;
    s.n = 3;
    s.m = 1;
    s.f = [m](const Vec& x) { return Vec(m.A * x); };
    s.g = [m](const Vec&) { return Mat(m.B); };
    Box u_box;
    u_box.lo = Vec::Constant(1, -p.u_max);
    u_box.hi = Vec::Constant(1, p.u_max);
    s.input_box = u_box;
    return s;
}

std::function<Vec(double, const Vec&)> pd_tracker(double kv, double kp, double kd,
                                                  double amp, double freq) {
    // Lean-angle tracker riding on the stabilizing inner loop.  The velocity
    // term is required: without it the non-minimum-phase v dynamics run away
    // while phi still tracks.
    return [kv, kp, kd, amp, freq](double t, const Vec& x) {
        const double phi_ref = amp * std::sin(freq * t);
        const double dphi_ref = amp * freq * std::cos(freq * t);
        Vec u(1);
        u << kv * x(0) + kp * (x(1) - phi_ref) + kd * (x(2) - dphi_ref);
        return u;
    };
}

std::vector<Vec> segway_samples() {
    auto sample = [](double v, double phi, double dphi) {
        Vec x(3);
        x << v, phi, dphi;
        return x;
    };
    return {sample(0.0, 0.1, 0.0), sample(0.5, -0.15, 0.3), sample(-0.8, 0.2, -0.5),
            sample(1.0, 0.0, 0.8)};
}

// Stabilizing feedback u = K_fb x shared by the CLF construction and the
// backup controller (velocity gain positive: the cart must pitch to brake).
RowVec segway_feedback() {
    RowVec k(3);
    k << 0.9, 9.0, 2.0;
    return k;
}

}  // namespace

ControlAffineSystem segway_lite_system(const SegwayLiteParams& p) {
    if (!(p.M > 0.0) || !(p.m_p > 0.0) || !(p.l > 0.0)) {
        throw InvalidArgument("segway: masses and length must be positive");
    }
    return make_system(p);
}

Scenario make_segway_lite(const ParamMap& overrides) {
    detail::ParamReader r(overrides);
    SegwayLiteParams p;
    const double pole1 = r.get("pole1", 3.0);
    const double pole2 = r.get("pole2", 6.0);
    const double ref_amp = r.get("ref_amp", 0.39269908169872414);  // pi/8 > pi/12
    const double ref_freq = r.get("ref_freq", 1.5);
    // Kick near a reference zero crossing (t = 2*pi/freq), where the angle
    // margin is widest; a kick delivered while phi sits on the barrier would
    // demand more torque than the motor bound allows.
    const double kick_time = r.get("kick_time", 4.18879);
    const double kick_mag = r.get("kick_mag", 0.6);
    const double kv = r.get("kv", 0.9);
    const double kp = r.get("kp", 6.0);
    const double kd = r.get("kd", 1.0);
    const double p_relax = r.get("p_relax", 100.0);
    r.finish();

    Scenario sc;
    sc.name = "segway_lite";
    sc.description =
        "Segway balancing with the naive angle barriers pi/12 -+ phi, enforced "
        "through relative-degree-2 ECBF rows while a PD tracker chases a "
        "sinusoidal angle reference that exceeds the limit.";
    sc.state_names = {"v", "phi", "dphi"};
    sc.sys = make_system(p);

    const SegwayMatrices m = segway_matrices(p);
    const RowVec a2 = m.A.row(2);
    const double b2 = m.B(2);

    Vec poles(2);
    poles << pole1, pole2;
    for (const double s : {+1.0, -1.0}) {
        // s = +1: h = phi_max - phi (upper limit); s = -1: h = phi_max + phi.
        LieChain chain;
        chain.r = 2;
        chain.lf_powers = {
            [s, p](const Vec& x) { return p.phi_max - s * x(1); },
            [s](const Vec& x) { return -s * x(2); },
            [s, a2](const Vec& x) { return -s * a2.dot(x); },
        };
        chain.lglf = [s, b2](const Vec&) { return Vec::Constant(1, -s * b2); };
        sc.designs.push_back(make_ecbf_design(std::move(chain), poles));
    }
    sc.h_names = {"h_phi_upper", "h_phi_lower"};

    sc.lyapunov = quadratic_clf(m.A, m.B, segway_feedback());
    sc.nominal = pd_tracker(kv, kp, kd, ref_amp, ref_freq);
    sc.p_relax = p_relax;

    sc.defaults.ctrl_dt = 1e-3;
    sc.defaults.duration = 10.0;
    sc.defaults.x0 = Vec::Zero(3);

    if (kick_mag != 0.0) {
        DisturbanceEvent ev;
        ev.t = kick_time;
        ev.delta = Vec::Zero(3);
        ev.delta(2) = kick_mag;
        ev.label = "kick";
        sc.events.push_back(ev);
    }

    sc.diag_samples = segway_samples();
    sc.param_keys = r.keys();
    return sc;
}

Scenario make_segway_backup(const ParamMap& overrides) {
    detail::ParamReader r(overrides);
    SegwayLiteParams p;
    const double horizon = r.get("horizon", 2.0);
    const double flow_dt = r.get("flow_dt", 0.02);
    const double ref_amp = r.get("ref_amp", 0.39269908169872414);
    const double ref_freq = r.get("ref_freq", 1.5);
    const double kick_time = r.get("kick_time", 4.18879);
    const double kick_mag = r.get("kick_mag", 0.0);
    const double alpha_c = r.get("alpha_c", 2.0);
    const double p_relax = r.get("p_relax", 100.0);
    r.finish();

    Scenario sc;
    sc.name = "segway_backup";
    sc.description =
        "Segway balancing with a backup-controller barrier: h(x) is the minimum "
        "of the scaled state-box margins along the flow of the saturated "
        "stabilizing law, filtered as a plain relative-degree-1 CBF.";
    sc.state_names = {"v", "phi", "dphi"};
    sc.sys = make_system(p);

    const SegwayMatrices m = segway_matrices(p);
    const RowVec k_fb = segway_feedback();

    BackupCbf bc;
    bc.sys = sc.sys;
    // Scaled margins so all six constraints share the dimensionless range
    // [-inf, 1]; rho(0) = 1.
    bc.rho = [p](const Vec& x) {
        const double mv = (p.v_max - std::abs(x(0))) / p.v_max;
        const double mphi = (p.phi_max - std::abs(x(1))) / p.phi_max;
        const double mdphi = (p.dphi_max - std::abs(x(2))) / p.dphi_max;
        return std::min({mv, mphi, mdphi});
    };
    bc.grad_rho = [p](const Vec& x) {
        const double mv = (p.v_max - std::abs(x(0))) / p.v_max;
        const double mphi = (p.phi_max - std::abs(x(1))) / p.phi_max;
        const double mdphi = (p.dphi_max - std::abs(x(2))) / p.dphi_max;
        Vec grad = Vec::Zero(3);
        if (mv <= mphi && mv <= mdphi) {
            grad(0) = (x(0) >= 0.0 ? -1.0 : 1.0) / p.v_max;
        } else if (mphi <= mdphi) {
            grad(1) = (x(1) >= 0.0 ? -1.0 : 1.0) / p.phi_max;
        } else {
            grad(2) = (x(2) >= 0.0 ? -1.0 : 1.0) / p.dphi_max;
        }
        return grad;
    };
    bc.beta = [k_fb, p](const Vec& x) {
        const double u = std::clamp(k_fb.dot(x), -p.u_max, p.u_max);
        return Vec::Constant(1, u);
    };
    bc.horizon_T = horizon;
    bc.flow_dt = flow_dt;
    bc.fd_step = 1e-4;
    bc.alpha = ExtendedClassKInf::linear(alpha_c);
    bc.validate();
    sc.backup = bc;

    sc.barriers = {as_barrier_spec(bc)};
    sc.h_names = {"h_backup"};

    sc.lyapunov = quadratic_clf(m.A, m.B, k_fb);
    sc.nominal = pd_tracker(0.9, 6.0, 1.0, ref_amp, ref_freq);
    sc.p_relax = p_relax;

    // The phi margin has no direct input authority, so holding the input over
    // a long period lets the angle graze the bound; 5 ms keeps the excursion
    // inside the finite-difference tolerance regime while each step still
    // affords its several flow solves.
    sc.defaults.ctrl_dt = 5e-3;
    sc.defaults.duration = 10.0;
    sc.defaults.x0 = Vec::Zero(3);

    if (kick_mag != 0.0) {
        DisturbanceEvent ev;
        ev.t = kick_time;
        ev.delta = Vec::Zero(3);
        ev.delta(2) = kick_mag;
        ev.label = "kick";
        sc.events.push_back(ev);
    }

    sc.diag_samples = segway_samples();
    sc.param_keys = r.keys();
    return sc;
}

}  // namespace safectl
