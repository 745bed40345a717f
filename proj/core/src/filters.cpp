#include "safectl/filters.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace safectl {

namespace {

constexpr double kMembershipTol = 1e-9;

std::string snapshot(const Vec& x) {
    std::ostringstream os;
    os << "x = [" << x.transpose() << "]";
    return os.str();
}

bool nominal_feasible(const std::vector<ConstraintRow>& rows, const Vec& u,
                      const std::optional<Box>& input_box) {
    for (const auto& row : rows) {
        if (row.margin(u) < -kMembershipTol) return false;
    }
    if (input_box && !input_box->contains(u)) return false;
    return true;
}

}  // namespace

ConstraintRow cbf_constraint_row(const ControlAffineSystem& sys, const BarrierSpec& barrier,
                                 const Vec& x) {
    const auto lie = lie_derivatives(sys, barrier.grad_h(x), x);
    ConstraintRow row;
    row.a = lie.lg.transpose();
    row.b_rhs = -lie.lf - barrier.alpha(barrier.h(x));
    return row;
}

bool in_K_cbf(const ControlAffineSystem& sys, const BarrierSpec& barrier, const Vec& x,
              const Vec& u) {
    return cbf_constraint_row(sys, barrier, x).margin(u) >= -kMembershipTol;
}

bool in_K_clf(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov, const Vec& x,
              const Vec& u) {
    const auto lie = lie_derivatives(sys, lyapunov.grad_V(x), x);
    const double vdot = lie.lf + lie.lg.dot(u);
    return vdot <= -lyapunov.gamma(lyapunov.V(x)) / lyapunov.rapidity() + kMembershipTol;
}

FilterResult filter_input(const std::vector<ConstraintRow>& rows, const Vec& u_des,
                          const std::optional<Box>& input_box, const Vec& x_snapshot) {
    FilterResult res;
    if (nominal_feasible(rows, u_des, input_box)) {
        res.u_act = u_des;  // bitwise: minimal invasiveness
        res.diag.nominal_safe = true;
        return res;
    }

    if (rows.size() == 1 && !input_box) {
        res.u_act = solve_minnorm_single(u_des, rows[0].a, rows[0].b_rhs);
        res.diag.closed_form = true;
        res.diag.active_rows = {0};
        res.diag.perturbation_norm = (res.u_act - u_des).norm();
        return res;
    }

    const int m = static_cast<int>(u_des.size());
    QpProblem p;
    p.H = Mat::Identity(m, m);
    p.c = -u_des;
    p.ineq_A.resize(rows.size(), m);
    p.ineq_b.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        p.ineq_A.row(static_cast<int>(i)) = rows[i].a.transpose();
        p.ineq_b(static_cast<int>(i)) = rows[i].b_rhs;
    }
    p.bounds = input_box;

    const QpSolution sol = solve_active_set(p);
    if (sol.status != QpStatus::Optimal) {
        throw InfeasiblePointwise("safety filter QP " + std::string(to_string(sol.status)) +
                                  " at " + snapshot(x_snapshot));
    }
    res.u_act = sol.z_star;
    res.diag.active_rows = sol.active_set;
    res.diag.perturbation_norm = (res.u_act - u_des).norm();
    res.diag.kkt_residual = sol.kkt_residual;
    return res;
}

FilterResult safety_filter(const SafetyFilter& filt, const Vec& x) {
    const Vec u_des = filt.nominal(x);
    detail::require_finite(u_des, "nominal k(x)");
    return filter_input({cbf_constraint_row(filt.sys, filt.barrier, x)}, u_des,
                        filt.sys.input_box, x);
}

Vec min_norm_clf(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov, const Vec& x) {
    const auto lie = lie_derivatives(sys, lyapunov.grad_V(x), x);
    const double rate = lyapunov.gamma(lyapunov.V(x)) / lyapunov.rapidity();
    // L_f V + L_g V . u <= -rate  <=>  (-L_g V) . u >= L_f V + rate
    const Vec a = -lie.lg.transpose();
    const double b_rhs = lie.lf + rate;
    try {
        return solve_minnorm_single(Vec::Zero(sys.m), a, b_rhs);
    } catch (const InfeasiblePointwise&) {
        throw NotACLFHere("L_g V = 0 with L_f V > -gamma(V)/eps at " + snapshot(x));
    }
}

ConstraintRow clf_row(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov, const Vec& x) {
    const auto lie = lie_derivatives(sys, lyapunov.grad_V(x), x);
    // (-L_g V) . u + delta >= L_f V + gamma(V)/eps, coefficients over (u, delta)
    ConstraintRow row;
    row.a.resize(sys.m + 1);
    row.a.head(sys.m) = -lie.lg.transpose();
    row.a(sys.m) = 1.0;
    row.b_rhs = lie.lf + lyapunov.gamma(lyapunov.V(x)) / lyapunov.rapidity();
    return row;
}

UnifiedResult solve_unified(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov,
                            const std::vector<ConstraintRow>& safety_rows, const Mat& H_cost,
                            double p_relax, const Vec& x) {
    const int m = sys.m;
    const int d = m + 1;  // (u, delta)
    if (!(p_relax > 0.0)) throw InvalidArgument("p_relax must be > 0");

    QpProblem p;
    p.H = Mat::Zero(d, d);
    p.H.topLeftCorner(m, m) = H_cost;
    p.H(m, m) = 2.0 * p_relax;  // p * delta^2 == 1/2 * (2p) * delta^2
    p.c = Vec::Zero(d);

    p.ineq_A.resize(1 + safety_rows.size(), d);
    p.ineq_b.resize(1 + safety_rows.size());
    const ConstraintRow clf = clf_row(sys, lyapunov, x);
    p.ineq_A.row(0) = clf.a.transpose();
    p.ineq_b(0) = clf.b_rhs;
    for (size_t i = 0; i < safety_rows.size(); ++i) {
        p.ineq_A.row(static_cast<int>(i) + 1).setZero();
        p.ineq_A.block(static_cast<int>(i) + 1, 0, 1, m) = safety_rows[i].a.transpose();
        p.ineq_b(static_cast<int>(i) + 1) = safety_rows[i].b_rhs;
    }
    if (sys.input_box) {
        const double inf = std::numeric_limits<double>::infinity();
        Box z_bounds;
        z_bounds.lo = Vec::Constant(d, -inf);
        z_bounds.hi = Vec::Constant(d, inf);
        z_bounds.lo.head(m) = sys.input_box->lo;
        z_bounds.hi.head(m) = sys.input_box->hi;
        p.bounds = z_bounds;
    }

    const QpSolution sol = solve_active_set(p);
    if (sol.status != QpStatus::Optimal) {
        // delta makes the CLF row always satisfiable; only the safety rows
        // (plus the input box) can be jointly infeasible.
        throw InfeasiblePointwise("unified QP " + std::string(to_string(sol.status)) +
                                  ": safety rows infeasible at " + snapshot(x));
    }

    UnifiedResult out;
    out.u = sol.z_star.head(m);
    out.delta = sol.z_star(m);
    out.qp = sol;
    return out;
}

UnifiedResult clf_cbf_qp(const UnifiedController& ctrl, const Vec& x) {
    const Mat H = ctrl.H_cost ? ctrl.H_cost(x) : Mat::Identity(ctrl.sys.m, ctrl.sys.m);
    return solve_unified(ctrl.sys, ctrl.lyapunov, {cbf_constraint_row(ctrl.sys, ctrl.barrier, x)},
                         H, ctrl.p_relax, x);
}

}  // namespace safectl
