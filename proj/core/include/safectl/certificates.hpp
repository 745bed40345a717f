#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "safectl/class_k.hpp"
#include "safectl/system.hpp"

namespace safectl {

/// Barrier certificate: the safe set is C = {h >= 0}. grad_h must agree with
/// finite differences of h (see check_gradient_consistency).
struct BarrierSpec {
    std::function<double(const Vec&)> h;
    std::function<Vec(const Vec&)> grad_h;
    ExtendedClassKInf alpha = ExtendedClassKInf::linear(1.0);
};

/// Lyapunov certificate: positive definite V about its equilibrium, decay rate
/// gamma(V)/epsilon. epsilon in (0,1] scales the required decay (1 = plain CLF,
/// smaller = rapid exponential variant).
struct LyapunovSpec {
    std::function<double(const Vec&)> V;
    std::function<Vec(const Vec&)> grad_V;
    ExtendedClassKInf gamma = ExtendedClassKInf::linear(1.0);
    std::optional<double> epsilon;

    double rapidity() const { return epsilon.value_or(1.0); }
};

struct GradientSample {
    Vec x;
    double max_abs_deviation = 0.0;
    double grad_norm = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Report of grad-vs-finite-difference agreement over a sample set. A failing
/// sample either has a wrong gradient or sits on a nonsmooth point of the
/// scalar field; the caller decides which.
struct GradientConsistencyReport {
    std::vector<GradientSample> samples;
    bool pass = true;
    int worst_index = -1;
    double worst_deviation = 0.0;
};

/// Compares the supplied gradient against 5-point central finite differences
/// of the scalar field. Step per coordinate: 1e-4 * max(1, |x_i|). A sample
/// passes iff the max-abs deviation is <= max(1e-5, 1e-4 * ||grad||).
GradientConsistencyReport check_gradient_consistency(
    const std::function<double(const Vec&)>& field,
    const std::function<Vec(const Vec&)>& grad,
    const std::vector<Vec>& samples);

GradientConsistencyReport check_gradient_consistency(const BarrierSpec& spec,
                                                     const std::vector<Vec>& samples);
GradientConsistencyReport check_gradient_consistency(const LyapunovSpec& spec,
                                                     const std::vector<Vec>& samples);

/// 5-point central finite-difference gradient with the step rule above.
Vec fd_gradient(const std::function<double(const Vec&)>& field, const Vec& x,
                double step_scale = 1e-4);

}  // namespace safectl
