#pragma once

#include <functional>
#include <vector>

#include "safectl/certificates.hpp"
#include "safectl/qp.hpp"
#include "safectl/system.hpp"

namespace safectl {

/// One affine input constraint: a . u >= b_rhs. For a CBF this is exactly
/// membership in K_cbf(x).
struct ConstraintRow {
    Vec a;
    double b_rhs = 0.0;

    double margin(const Vec& u) const { return a.dot(u) - b_rhs; }
};

/// Min-norm safety filter: perturbs the nominal controller k(x) as little as
/// possible while staying in K_cbf(x).
struct SafetyFilter {
    ControlAffineSystem sys;
    BarrierSpec barrier;
    std::function<Vec(const Vec&)> nominal;
};

/// Unified stability/safety controller: CLF row relaxed by delta (penalized by
/// p_relax), safety rows never relaxed.
struct UnifiedController {
    ControlAffineSystem sys;
    LyapunovSpec lyapunov;
    BarrierSpec barrier;
    std::function<Mat(const Vec&)> H_cost;  // defaults to identity when unset
    double p_relax = 100.0;
};

struct FilterDiagnostics {
    bool nominal_safe = false;   // nominal already satisfied every row
    bool closed_form = false;    // solved by the single-constraint projection
    std::vector<int> active_rows;
    double perturbation_norm = 0.0;
    double kkt_residual = 0.0;
};

struct FilterResult {
    Vec u_act;
    FilterDiagnostics diag;
};

struct UnifiedResult {
    Vec u;
    double delta = 0.0;
    /// Full certificate. Compiled row order: CLF row (index 0), safety rows
    /// (1..), then input-box rows.
    QpSolution qp;
};

/// a = L_g h(x), b_rhs = -L_f h(x) - alpha(h(x)).
ConstraintRow cbf_constraint_row(const ControlAffineSystem& sys, const BarrierSpec& barrier,
                                 const Vec& x);

/// Sign tests on the affine conditions, tolerance 1e-9.
bool in_K_cbf(const ControlAffineSystem& sys, const BarrierSpec& barrier, const Vec& x,
              const Vec& u);
bool in_K_clf(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov, const Vec& x,
              const Vec& u);

/// min 1/2 ||u - k(x)||^2 over K_cbf(x). Uses the closed form when U = R^m,
/// otherwise routes through the active-set solver with input-box rows.
/// Throws InfeasiblePointwise (with a state snapshot) when no safe input exists.
FilterResult safety_filter(const SafetyFilter& filt, const Vec& x);

/// min 1/2 ||u||^2  s.t.  L_f V + L_g V . u <= -gamma(V(x)) / epsilon.
/// Throws NotACLFHere when L_g V = 0 with the decay condition violated.
Vec min_norm_clf(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov, const Vec& x);

/// The unified QP over (u, delta):
///   min 1/2 u^T H(x) u + p delta^2
///   s.t. L_f V + L_g V . u <= -gamma(V)/eps + delta
///        L_f h + L_g h . u >= -alpha(h)
/// Throws InfeasiblePointwise only if the safety row (plus input box) alone is
/// infeasible; delta cannot rescue safety by construction.
UnifiedResult clf_cbf_qp(const UnifiedController& ctrl, const Vec& x);

// ---- shared row-based cores (used by the ECBF variants and the simulator) ----

/// Min-norm filtering of an explicit nominal input through arbitrary rows.
/// Returns the nominal bitwise whenever it satisfies every row to 1e-9 and
/// lies in the input box.
FilterResult filter_input(const std::vector<ConstraintRow>& rows, const Vec& u_des,
                          const std::optional<Box>& input_box, const Vec& x_snapshot);

/// CLF row for the unified programs: coefficients over (u, delta).
ConstraintRow clf_row(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov, const Vec& x);

/// Unified QP with an arbitrary stack of safety rows.
UnifiedResult solve_unified(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov,
                            const std::vector<ConstraintRow>& safety_rows, const Mat& H_cost,
                            double p_relax, const Vec& x);

}  // namespace safectl
