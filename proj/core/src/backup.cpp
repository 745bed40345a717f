#include "safectl/backup.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "safectl/errors.hpp"
#include "safectl/integrate.hpp"

namespace safectl {

namespace {

constexpr double kDivergeNorm = 1e6;

VectorField closed_loop_field(const BackupCbf& b) {
    return [&b](const Vec& x) { return b.sys.xdot(x, b.beta(x)); };
}

void check_state(const Vec& x, double tau) {
    if (!x.allFinite() || x.norm() > kDivergeNorm) {
        throw DivergedFlow("backup flow diverged at tau = " + std::to_string(tau));
    }
}

}  // namespace

void BackupCbf::validate() const {
    if (!(flow_dt > 0.0) || !(horizon_T > 0.0)) {
        throw InvalidArgument("backup cbf: horizon_T and flow_dt must be positive");
    }
    const double ratio = horizon_T / flow_dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) || rounded < 10.0) {
        throw InvalidArgument("backup cbf: horizon_T / flow_dt must be an integer >= 10, got " +
                              std::to_string(ratio));
    }
    if (!rho || !beta) throw InvalidArgument("backup cbf: rho and beta are required");
    if (!(fd_step > 0.0)) throw InvalidArgument("backup cbf: fd_step must be positive");
}

std::vector<std::pair<double, Vec>> backup_flow(const BackupCbf& b, const Vec& x,
                                                double until) {
    detail::require_finite(x, "backup flow start");
    if (until < 0.0) throw InvalidArgument("backup flow: negative horizon");
    const VectorField field = closed_loop_field(b);

    std::vector<std::pair<double, Vec>> traj;
    traj.reserve(static_cast<size_t>(until / b.flow_dt) + 2);
    double tau = 0.0;
    Vec z = x;
    check_state(z, tau);
    traj.emplace_back(tau, z);
    while (tau < until - 1e-12) {
        const double dt = std::min(b.flow_dt, until - tau);
        z = rk4_step(field, z, dt);
        tau += dt;
        check_state(z, tau);
        traj.emplace_back(tau, z);
    }
    return traj;
}

BackupHInfo backup_h_info(const BackupCbf& b, const Vec& x) {
    detail::require_finite(x, "backup_h argument");
    const VectorField field = closed_loop_field(b);

    BackupHInfo info;
    double tau = 0.0;
    Vec z = x;
    check_state(z, tau);
    info.h = b.rho(z);
    info.argmin_tau = 0.0;
    while (tau < b.horizon_T - 1e-12) {
        const double dt = std::min(b.flow_dt, b.horizon_T - tau);
        z = rk4_step(field, z, dt);
        tau += dt;
        check_state(z, tau);
        const double r = b.rho(z);
        if (r < info.h) {
            info.h = r;
            info.argmin_tau = tau;
        }
    }
    info.min_at_horizon = info.argmin_tau >= b.horizon_T - 0.5 * b.flow_dt;
    if (!std::isfinite(info.h)) throw NumericalFailure("backup_h: rho nonfinite along flow");
    return info;
}

double backup_h(const BackupCbf& b, const Vec& x) { return backup_h_info(b, x).h; }

Vec backup_h_gradient(const BackupCbf& b, const Vec& x) {
    Vec grad(x.size());
    for (int i = 0; i < x.size(); ++i) {
        const double step = b.fd_step * std::max(1.0, std::abs(x(i)));
        Vec xp = x, xm = x;
        xp(i) += step;
        xm(i) -= step;
        grad(i) = (backup_h(b, xp) - backup_h(b, xm)) / (2.0 * step);
        if (!std::isfinite(grad(i))) {
            throw NumericalFailure("backup_h_gradient: nonfinite difference in coordinate " +
                                   std::to_string(i));
        }
    }
    return grad;
}

BarrierSpec as_barrier_spec(const BackupCbf& b) {
    const auto owned = std::make_shared<const BackupCbf>(b);
    BarrierSpec spec;
    spec.h = [owned](const Vec& x) { return backup_h(*owned, x); };
    spec.grad_h = [owned](const Vec& x) { return backup_h_gradient(*owned, x); };
    spec.alpha = owned->alpha;
    return spec;
}

}  // namespace safectl
