#include "safectl/system.hpp"

#include <cmath>
#include <limits>

namespace safectl {

Box Box::unbounded(int dim) {
    const double inf = std::numeric_limits<double>::infinity();
    Box b;
    b.lo = Vec::Constant(dim, -inf);
    b.hi = Vec::Constant(dim, inf);
    return b;
}

bool Box::contains(const Vec& x, double tol) const {
    if (x.size() != lo.size()) return false;
    for (int i = 0; i < x.size(); ++i) {
        if (x(i) < lo(i) - tol || x(i) > hi(i) + tol) return false;
    }
    return true;
}

Vec Box::clamp(const Vec& x) const {
    return x.cwiseMax(lo).cwiseMin(hi);
}

namespace detail {

void require_finite(const Vec& v, const std::string& what) {
    for (int i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v(i))) {
            throw NumericalFailure(what + ": non-finite value at coordinate " + std::to_string(i));
        }
    }
}

void require_finite(const Mat& m, const std::string& what) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (!std::isfinite(m(i, j))) {
                throw NumericalFailure(what + ": non-finite value at (" + std::to_string(i) + "," +
                                       std::to_string(j) + ")");
            }
        }
    }
}

}  // namespace detail

Vec ControlAffineSystem::eval_f(const Vec& x) const {
    Vec fx = f(x);
    if (fx.size() != n) throw InvalidArgument("f(x) returned wrong dimension");
    detail::require_finite(fx, "f(x)");
    return fx;
}

Mat ControlAffineSystem::eval_g(const Vec& x) const {
    Mat gx = g(x);
    if (gx.rows() != n || gx.cols() != m) throw InvalidArgument("g(x) returned wrong shape");
    detail::require_finite(gx, "g(x)");
    return gx;
}

Vec ControlAffineSystem::xdot(const Vec& x, const Vec& u) const {
    if (u.size() != m) throw InvalidArgument("u has wrong dimension");
    return eval_f(x) + eval_g(x) * u;
}

bool ControlAffineSystem::in_domain(const Vec& x, double tol) const {
    if (!domain_box) return true;
    return domain_box->contains(x, tol);
}

LieDerivatives lie_derivatives(const ControlAffineSystem& sys, const Vec& grad, const Vec& x) {
    if (grad.size() != sys.n) throw InvalidArgument("lie_derivatives: grad has wrong dimension");
    detail::require_finite(x, "x");
    detail::require_finite(grad, "grad");

    LieDerivatives out;
    out.lf = grad.dot(sys.eval_f(x));
    out.lg = grad.transpose() * sys.eval_g(x);
    if (!std::isfinite(out.lf)) throw NumericalFailure("L_f: non-finite result");
    detail::require_finite(Vec(out.lg.transpose()), "L_g");
    return out;
}

}  // namespace safectl
