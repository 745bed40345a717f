#include "safectl/class_k.hpp"

#include <cmath>

namespace safectl {

ExtendedClassKInf ExtendedClassKInf::linear(double c) {
    if (!(c > 0.0)) throw InvalidArgument("class-K linear: coefficient must be > 0");
    return {Kind::Linear, c, 0.0};
}

ExtendedClassKInf ExtendedClassKInf::cubic(double c) {
    if (!(c > 0.0)) throw InvalidArgument("class-K cubic: coefficient must be > 0");
    return {Kind::Cubic, c, 0.0};
}

ExtendedClassKInf ExtendedClassKInf::tanh_plus_linear(double c1, double c2) {
    if (!(c1 > 0.0) || !(c2 > 0.0))
        throw InvalidArgument("class-K tanh+linear: both coefficients must be > 0");
    return {Kind::TanhPlusLinear, c1, c2};
}

double ExtendedClassKInf::operator()(double r) const {
    switch (kind_) {
        case Kind::Linear:
            return c1_ * r;
        case Kind::Cubic:
            return c1_ * r * r * r;
        case Kind::TanhPlusLinear:
            return c1_ * std::tanh(r) + c2_ * r;
    }
    return 0.0;  // unreachable
}

}  // namespace safectl
