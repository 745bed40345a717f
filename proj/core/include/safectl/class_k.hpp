#pragma once

#include "safectl/errors.hpp"

namespace safectl {

/// Extended class-K-infinity function: strictly increasing on all of R with
/// alpha(0) = 0. A closed enum of parametric forms so that monotonicity holds
/// by construction; arbitrary callables are deliberately not accepted.
///
/// Forms:
///   linear(c):              alpha(r) = c * r
///   cubic(c):               alpha(r) = c * r^3
///   tanh_plus_linear(c1,c2): alpha(r) = c1 * tanh(r) + c2 * r
///
/// The class-K shaping function gamma of a CLF reuses this type restricted to
/// nonnegative arguments.
class ExtendedClassKInf {
public:
    enum class Kind { Linear, Cubic, TanhPlusLinear };

    static ExtendedClassKInf linear(double c);
    static ExtendedClassKInf cubic(double c);
    static ExtendedClassKInf tanh_plus_linear(double c1, double c2);

    double operator()(double r) const;

    Kind kind() const { return kind_; }
    double c1() const { return c1_; }
    double c2() const { return c2_; }

private:
    ExtendedClassKInf(Kind k, double c1, double c2) : kind_(k), c1_(c1), c2_(c2) {}

    Kind kind_;
    double c1_;
    double c2_;
};

}  // namespace safectl
