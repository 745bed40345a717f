#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "safectl/system.hpp"

namespace safectl {

struct Scenario;

struct RunConfig {
    double ctrl_dt = 1e-3;
    int sim_substeps = 1;
    double duration = 10.0;
    Vec x0;
    std::uint64_t seed = 0;

    /// ctrl_dt > 0, sim_substeps >= 1, duration >= ctrl_dt. Throws InvalidArgument.
    void validate() const;
};

/// Instantaneous state increment at time t (the "kick" experiment). Applied to
/// the state just before the controller evaluation at the nearest control step.
struct DisturbanceEvent {
    double t = 0.0;
    Vec delta;
    std::string label;
};

enum class ControllerKind { Nominal, SafetyFilter, ClfCbfQp, ClfEcbfQp, BackupFilter };

const char* to_string(ControllerKind k);
std::vector<std::string> controller_names();
/// Throws InvalidArgument listing the valid names.
ControllerKind controller_from_string(const std::string& name);

struct LogRow {
    double t = 0.0;
    Vec x;
    Vec u_des;
    Vec u_act;
    Vec h;  // one entry per enforced barrier (plain barriers, then ECBF designs)
    double V = std::numeric_limits<double>::quiet_NaN();
    double delta = 0.0;
    /// "nominal" (bitwise passthrough), "closed_form", or "optimal".
    std::string qp_status;
    std::vector<int> active_set;
    double perturbation = 0.0;  // ||u_act - u_des||
};

enum class RunOutcome { Completed, AbortedInfeasible, AbortedNumerical };

struct TrajectoryLog {
    int n = 0;
    int m = 0;
    std::vector<std::string> h_names;
    std::vector<LogRow> rows;
    RunOutcome outcome = RunOutcome::Completed;
    std::string failure_message;
};

/// Classical RK4 with u held constant. Throws DivergedState on a non-finite
/// result.
Vec rk4_step(const ControlAffineSystem& sys, const Vec& x, const Vec& u, double dt);

/// Fixed-step closed loop: evaluate the controller at each control step, hold
/// the input over sim_substeps RK4 substeps, log every control step.
/// InfeasiblePointwise / DivergedState truncate the log with a failure marker
/// instead of propagating.
TrajectoryLog run_closed_loop(const Scenario& sc, ControllerKind controller,
                              const RunConfig& cfg);

struct InvarianceReport {
    bool safe = false;
    double tol = 1e-3;
    std::vector<double> min_h;
    std::vector<double> min_h_time;
    double first_violation_time = std::numeric_limits<double>::quiet_NaN();
    int first_violation_index = -1;
    /// Some h started negative; "safe" then refers to recovery, reported via
    /// recovery_time (asymptotic stability of the safe set).
    bool started_outside = false;
    double recovery_time = std::numeric_limits<double>::quiet_NaN();
    double max_perturbation = 0.0;
    double mean_active_set_size = 0.0;
};

InvarianceReport invariance_report(const TrajectoryLog& log, double tol = 1e-3);

struct EcbfBoundReport {
    bool pass = true;
    /// min over log rows and designs of h_i(x(t)) - C_out exp((F - G K) t) eta_b(x0).
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_time = 0.0;
    int worst_design = -1;
    bool applicable = false;  // scenario has ECBF designs and the run has rows
};

/// Checks the exponential lower bound h(x(t)) >= C_out exp((F - G K_alpha) t)
/// eta_b(x0) - tol at every log row, for every design. Assumes an undisturbed
/// run (events reset the bound's premise).
EcbfBoundReport ecbf_bound_report(const TrajectoryLog& log, const Scenario& sc,
                                  double tol = 1e-3);

}  // namespace safectl
