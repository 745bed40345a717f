#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "safectl/certificates.hpp"
#include "safectl/system.hpp"

namespace safectl {

/// Barrier induced by a backup controller: h(x) = min_tau rho(phi_beta(tau, x))
/// over a finite horizon, where phi_beta is the flow of xdot = f + g beta(x).
/// The allowable set is {rho >= 0}; {h >= 0} is contained in it by
/// construction (tau = 0 is in the minimization).
struct BackupCbf {
    ControlAffineSystem sys;
    std::function<double(const Vec&)> rho;
    std::function<Vec(const Vec&)> grad_rho;
    std::function<Vec(const Vec&)> beta;
    double horizon_T = 1.0;
    double flow_dt = 1e-2;
    double fd_step = 1e-4;
    ExtendedClassKInf alpha = ExtendedClassKInf::linear(1.0);

    /// horizon_T / flow_dt must be an integer >= 10. Throws InvalidArgument.
    void validate() const;
};

/// RK4-sampled closed-loop trajectory at step flow_dt, including tau = 0 and
/// tau = until (partial last step if needed). Throws DivergedFlow when the
/// state norm exceeds 1e6 or goes nonfinite.
std::vector<std::pair<double, Vec>> backup_flow(const BackupCbf& b, const Vec& x,
                                                double until);

struct BackupHInfo {
    double h = 0.0;
    double argmin_tau = 0.0;
    /// Minimum attained at tau = horizon_T: the true infimum over [0, inf) may
    /// lie beyond the horizon, so h is only an upper bound there.
    bool min_at_horizon = false;
};

BackupHInfo backup_h_info(const BackupCbf& b, const Vec& x);
double backup_h(const BackupCbf& b, const Vec& x);

/// Central finite differences of backup_h, per-coordinate step
/// fd_step * max(1, |x_i|). Throws NumericalFailure on a nonfinite difference.
Vec backup_h_gradient(const BackupCbf& b, const Vec& x);

/// Packages (backup_h, backup_h_gradient, alpha) for use by SafetyFilter
/// unchanged. The returned spec owns a copy of b.
BarrierSpec as_barrier_spec(const BackupCbf& b);

}  // namespace safectl
