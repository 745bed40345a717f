#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

#include "safectl/errors.hpp"

namespace safectl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

/// Axis-aligned box, per-coordinate bounds. Entries may be +-inf.
struct Box {
    Vec lo;
    Vec hi;

    static Box unbounded(int dim);

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& x, double tol = 0.0) const;
    Vec clamp(const Vec& x) const;
};

/// The plant: xdot = f(x) + g(x) u with state dimension n and input dimension m.
/// domain_box bounds the region D the certificates are stated on; input_box
/// bounds U (absent means U = R^m). f and g must be deterministic and return
/// finite values of shapes n and n-by-m on in-domain states.
struct ControlAffineSystem {
    int n = 0;
    int m = 0;
    std::function<Vec(const Vec&)> f;
    std::function<Mat(const Vec&)> g;
    std::optional<Box> domain_box;
    std::optional<Box> input_box;

    /// Evaluates f with shape/finiteness checks. Throws NumericalFailure naming
    /// the first offending coordinate.
    Vec eval_f(const Vec& x) const;
    /// Evaluates g with shape/finiteness checks.
    Mat eval_g(const Vec& x) const;
    /// Closed-loop derivative f(x) + g(x) u.
    Vec xdot(const Vec& x, const Vec& u) const;

    bool in_domain(const Vec& x, double tol = 0.0) const;
};

/// Lie derivatives of a scalar function with gradient `grad` at x:
/// lf = grad . f(x), lg = grad^T g(x).
struct LieDerivatives {
    double lf = 0.0;
    RowVec lg;
};

LieDerivatives lie_derivatives(const ControlAffineSystem& sys, const Vec& grad, const Vec& x);

namespace detail {
/// Throws NumericalFailure naming `what` and the first non-finite coordinate.
void require_finite(const Vec& v, const std::string& what);
void require_finite(const Mat& m, const std::string& what);
}  // namespace detail

}  // namespace safectl
