#pragma once

#include <optional>
#include <vector>

#include "safectl/system.hpp"

namespace safectl {

/// Small dense strictly convex QP:
///
///   min_z  1/2 z^T H z + c^T z
///   s.t.   ineq_A.row(i) . z >= ineq_b(i)   for every row i
///          z in bounds (optional box, compiled into extra rows)
///
/// Contract: H symmetric PD, d <= 8 decision variables, and at most 8
/// inequality rows after box compilation.
struct QpProblem {
    Mat H;
    Vec c;
    Mat ineq_A;
    Vec ineq_b;
    std::optional<Box> bounds;

    int dim() const { return static_cast<int>(H.rows()); }
    int num_rows() const { return static_cast<int>(ineq_A.rows()); }

    double objective(const Vec& z) const { return 0.5 * z.dot(H * z) + c.dot(z); }

    /// Throws InvalidArgument if shapes are inconsistent, H is asymmetric
    /// beyond 1e-12, Cholesky fails (not PD), or the size contract is broken.
    void validate() const;
};

enum class QpStatus { Optimal, Infeasible, Degenerate };

struct QpSolution {
    Vec z_star;
    std::vector<int> active_set;   // row indices of the compiled constraint matrix
    Vec duals;                     // one multiplier per compiled row, >= 0
    double kkt_residual = 0.0;
    QpStatus status = QpStatus::Infeasible;
    double condition_estimate = 0.0;  // worst KKT conditioning seen (Degenerate only)
};

const char* to_string(QpStatus s);

/// Closed-form single-constraint min-norm solution:
///   min 1/2 ||u - nominal||^2  s.t.  a . u >= b_rhs,  U = R^m.
/// Returns `nominal` unchanged (bitwise) when it already satisfies the
/// constraint; otherwise projects onto the halfspace boundary.
/// Throws InfeasiblePointwise when ||a|| <= 1e-12 and the constraint is
/// violated (L_g h = 0 with a violated drift condition: h is not a valid CBF
/// at this state).
Vec solve_minnorm_single(const Vec& nominal, const Vec& a, double b_rhs);

/// Exact active-set enumeration. Every subset S of constraint rows is tried in
/// increasing bitmask order; for each, the equality-constrained KKT system is
/// solved by dense factorization, and the first candidate that is primal
/// feasible (>= -1e-9) with nonnegative duals (>= -1e-10) is returned with an
/// optimality certificate. Tie-breaking is therefore deterministic.
QpSolution solve_active_set(const QpProblem& p);

}  // namespace safectl
