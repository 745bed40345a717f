#include "safectl/certificates.hpp"

#include <algorithm>
#include <cmath>

namespace safectl {

Vec fd_gradient(const std::function<double(const Vec&)>& field, const Vec& x, double step_scale) {
    const int n = static_cast<int>(x.size());
    Vec grad(n);
    Vec xp = x;
    for (int i = 0; i < n; ++i) {
        const double h = step_scale * std::max(1.0, std::abs(x(i)));
        const double xi = x(i);
        // 5-point stencil: (-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / (12h)
        xp(i) = xi + 2.0 * h;
        const double fp2 = field(xp);
        xp(i) = xi + h;
        const double fp1 = field(xp);
        xp(i) = xi - h;
        const double fm1 = field(xp);
        xp(i) = xi - 2.0 * h;
        const double fm2 = field(xp);
        xp(i) = xi;
        grad(i) = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    }
    return grad;
}

GradientConsistencyReport check_gradient_consistency(
    const std::function<double(const Vec&)>& field,
    const std::function<Vec(const Vec&)>& grad,
    const std::vector<Vec>& samples) {
    GradientConsistencyReport report;
    report.samples.reserve(samples.size());
    for (const auto& x : samples) {
        GradientSample s;
        s.x = x;
        const Vec analytic = grad(x);
        const Vec numeric = fd_gradient(field, x);
        s.grad_norm = analytic.norm();
        s.max_abs_deviation = (analytic - numeric).cwiseAbs().maxCoeff();
        s.tolerance = std::max(1e-5, 1e-4 * s.grad_norm);
        s.pass = std::isfinite(s.max_abs_deviation) && s.max_abs_deviation <= s.tolerance;
        if (!s.pass) report.pass = false;
        if (s.max_abs_deviation > report.worst_deviation || report.worst_index < 0) {
            report.worst_deviation = s.max_abs_deviation;
            report.worst_index = static_cast<int>(report.samples.size());
        }
        report.samples.push_back(std::move(s));
    }
    return report;
}

GradientConsistencyReport check_gradient_consistency(const BarrierSpec& spec,
                                                     const std::vector<Vec>& samples) {
    return check_gradient_consistency(spec.h, spec.grad_h, samples);
}

GradientConsistencyReport check_gradient_consistency(const LyapunovSpec& spec,
                                                     const std::vector<Vec>& samples) {
    return check_gradient_consistency(spec.V, spec.grad_V, samples);
}

}  // namespace safectl
