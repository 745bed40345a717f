#include "safectl/sim.hpp"

#include <cmath>
#include <map>
#include <unsupported/Eigen/MatrixFunctions>

#include "safectl/ecbf.hpp"
#include "safectl/errors.hpp"
#include "safectl/filters.hpp"
#include "safectl/integrate.hpp"
#include "safectl/scenarios.hpp"

namespace safectl {

void RunConfig::validate() const {
    if (!(ctrl_dt > 0.0)) throw InvalidArgument("run config: ctrl_dt must be positive");
    if (sim_substeps < 1) throw InvalidArgument("run config: sim_substeps must be >= 1");
    if (!(duration >= ctrl_dt)) {
        throw InvalidArgument("run config: duration must be >= ctrl_dt");
    }
}

const char* to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::Nominal: return "nominal";
        case ControllerKind::SafetyFilter: return "safety_filter";
        case ControllerKind::ClfCbfQp: return "clf_cbf_qp";
        case ControllerKind::ClfEcbfQp: return "clf_ecbf_qp";
        case ControllerKind::BackupFilter: return "backup_filter";
    }
    return "?";
}

std::vector<std::string> controller_names() {
    return {"nominal", "safety_filter", "clf_cbf_qp", "clf_ecbf_qp", "backup_filter"};
}

ControllerKind controller_from_string(const std::string& name) {
    if (name == "nominal") return ControllerKind::Nominal;
    if (name == "safety_filter") return ControllerKind::SafetyFilter;
    if (name == "clf_cbf_qp") return ControllerKind::ClfCbfQp;
    if (name == "clf_ecbf_qp") return ControllerKind::ClfEcbfQp;
    if (name == "backup_filter") return ControllerKind::BackupFilter;
    std::string msg = "unknown controller '" + name + "'; valid:";
    for (const auto& n : controller_names()) msg += " " + n;
    throw InvalidArgument(msg);
}

Vec rk4_step(const ControlAffineSystem& sys, const Vec& x, const Vec& u, double dt) {
    const VectorField field = [&sys, &u](const Vec& z) { return sys.xdot(z, u); };
    Vec next = rk4_step(field, x, dt);
    if (!next.allFinite()) {
        throw DivergedState("integrator produced a non-finite state (|x| was " +
                            std::to_string(x.norm()) + ")");
    }
    return next;
}

namespace {

struct StepResult {
    Vec u_des;
    Vec u_act;
    double delta = 0.0;
    std::string status;
    std::vector<int> active_set;
};

std::vector<ConstraintRow> all_safety_rows(const Scenario& sc, const Vec& x) {
    std::vector<ConstraintRow> rows;
    rows.reserve(sc.barriers.size() + sc.designs.size());
    for (const auto& b : sc.barriers) rows.push_back(cbf_constraint_row(sc.sys, b, x));
    for (const auto& d : sc.designs) rows.push_back(ecbf_constraint_row(d, x));
    return rows;
}

Mat cost_matrix(const Scenario& sc, const Vec& x) {
    if (sc.H_cost) return sc.H_cost(x);
    return Mat::Identity(sc.sys.m, sc.sys.m);
}

StepResult eval_controller(const Scenario& sc, ControllerKind kind, double t, const Vec& x) {
    StepResult out;
    out.u_des = sc.nominal(t, x);
    detail::require_finite(out.u_des, "nominal input");

    switch (kind) {
        case ControllerKind::Nominal: {
            out.u_act = sc.sys.input_box ? sc.sys.input_box->clamp(out.u_des) : out.u_des;
            out.status = "nominal";
            break;
        }
        case ControllerKind::BackupFilter:
        case ControllerKind::SafetyFilter: {
            try {
                const FilterResult fr =
                    filter_input(all_safety_rows(sc, x), out.u_des, sc.sys.input_box, x);
                out.u_act = fr.u_act;
                out.status = fr.diag.nominal_safe ? "nominal"
                             : fr.diag.closed_form ? "closed_form"
                                                   : "optimal";
                out.active_set = fr.diag.active_rows;
            } catch (const InfeasiblePointwise&) {
                // The backup variant is an active-set invariance filter: when no
                // input certifies the row (the flow minimum can sit at tau = 0
                // where a degree-2 margin has no input authority), applying the
                // backup law itself is the certified fallback — the flow it
                // induces is exactly the one whose worst margin defines h.
                if (kind != ControllerKind::BackupFilter) throw;
                Vec u = sc.backup->beta(x);
                out.u_act = sc.sys.input_box ? sc.sys.input_box->clamp(u) : u;
                out.status = "backup_engaged";
            }
            break;
        }
        case ControllerKind::ClfCbfQp: {
            std::vector<ConstraintRow> rows;
            for (const auto& b : sc.barriers) {
                rows.push_back(cbf_constraint_row(sc.sys, b, x));
            }
            const UnifiedResult ur = solve_unified(sc.sys, *sc.lyapunov, rows,
                                                   cost_matrix(sc, x), sc.p_relax, x);
            out.u_act = ur.u;
            out.delta = ur.delta;
            out.status = to_string(ur.qp.status);
            out.active_set = ur.qp.active_set;
            break;
        }
        case ControllerKind::ClfEcbfQp: {
            const ClfEcbfResult er = clf_ecbf_qp(sc.sys, *sc.lyapunov, sc.designs,
                                                 cost_matrix(sc, x), sc.p_relax, x);
            out.u_act = er.u;
            out.delta = er.delta;
            out.status = to_string(er.qp.status);
            out.active_set = er.qp.active_set;
            break;
        }
    }
    return out;
}

void require_controller_inputs(const Scenario& sc, ControllerKind kind) {
    if (!sc.nominal) throw InvalidArgument(sc.name + ": scenario has no nominal law");
    const bool needs_lyap =
        kind == ControllerKind::ClfCbfQp || kind == ControllerKind::ClfEcbfQp;
    if (needs_lyap && !sc.lyapunov) {
        throw InvalidArgument(sc.name + ": controller needs a CLF");
    }
    if (kind == ControllerKind::ClfCbfQp && sc.barriers.empty()) {
        throw InvalidArgument(sc.name + ": clf_cbf_qp needs relative-degree-1 barriers");
    }
    if (kind == ControllerKind::ClfEcbfQp && sc.designs.empty()) {
        throw InvalidArgument(sc.name + ": clf_ecbf_qp needs ECBF designs");
    }
    if (kind == ControllerKind::BackupFilter && !sc.backup) {
        throw InvalidArgument(sc.name + ": backup_filter needs a backup controller");
    }
    if ((kind == ControllerKind::SafetyFilter || kind == ControllerKind::BackupFilter) &&
        sc.num_h() == 0) {
        throw InvalidArgument(sc.name + ": no barriers to enforce");
    }
}

Vec barrier_values(const Scenario& sc, const Vec& x) {
    Vec h(sc.num_h());
    int i = 0;
    for (const auto& b : sc.barriers) h(i++) = b.h(x);
    for (const auto& d : sc.designs) h(i++) = d.chain.h(x);
    return h;
}

// Abort rows may be built before h/V were evaluated; pad so every row has the
// full column set.
void finish_marker_row(LogRow& row, const Scenario& sc) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (row.h.size() != sc.num_h()) row.h = Vec::Constant(sc.num_h(), nan);
}

}  // namespace

TrajectoryLog run_closed_loop(const Scenario& sc, ControllerKind kind,
                              const RunConfig& cfg) {
    cfg.validate();
    require_controller_inputs(sc, kind);
    if (cfg.x0.size() != sc.sys.n) {
        throw InvalidArgument(sc.name + ": x0 has dimension " +
                              std::to_string(cfg.x0.size()) + ", state is " +
                              std::to_string(sc.sys.n));
    }
    detail::require_finite(cfg.x0, "x0");

    const long long steps = std::llround(cfg.duration / cfg.ctrl_dt);
    const double sub_dt = cfg.ctrl_dt / cfg.sim_substeps;

    // events snap to the nearest control step; applied before that step's
    // controller evaluation
    std::map<long long, std::vector<const DisturbanceEvent*>> pending;
    for (const auto& ev : sc.events) {
        const long long k = std::llround(ev.t / cfg.ctrl_dt);
        if (k >= 0 && k <= steps) pending[k].push_back(&ev);
    }

    TrajectoryLog log;
    log.n = sc.sys.n;
    log.m = sc.sys.m;
    log.h_names = sc.h_names;

    Vec x = cfg.x0;
    for (long long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * cfg.ctrl_dt;
        if (const auto it = pending.find(k); it != pending.end()) {
            for (const DisturbanceEvent* ev : it->second) {
                if (ev->delta.size() != sc.sys.n) {
                    throw InvalidArgument(sc.name + ": event '" + ev->label +
                                          "' has wrong dimension");
                }
                x += ev->delta;
            }
        }

        LogRow row;
        row.t = t;
        row.x = x;

        try {
            row.h = barrier_values(sc, x);
            row.V = sc.lyapunov ? sc.lyapunov->V(x)
                                : std::numeric_limits<double>::quiet_NaN();
            const StepResult step = eval_controller(sc, kind, t, x);
            row.u_des = step.u_des;
            row.u_act = step.u_act;
            row.delta = step.delta;
            row.qp_status = step.status;
            row.active_set = step.active_set;
            row.perturbation = (step.u_act - step.u_des).norm();
        } catch (const InfeasiblePointwise& e) {
            row.u_des = sc.nominal(t, x);
            row.u_act = Vec::Constant(sc.sys.m, std::numeric_limits<double>::quiet_NaN());
            row.qp_status = "infeasible";
            finish_marker_row(row, sc);
            log.rows.push_back(std::move(row));
            log.outcome = RunOutcome::AbortedInfeasible;
            log.failure_message = e.what();
            return log;
        } catch (const Error& e) {
            row.u_des = Vec::Constant(sc.sys.m, std::numeric_limits<double>::quiet_NaN());
            row.u_act = row.u_des;
            row.qp_status = "numerical_failure";
            finish_marker_row(row, sc);
            log.rows.push_back(std::move(row));
            log.outcome = RunOutcome::AbortedNumerical;
            log.failure_message = e.what();
            return log;
        }
        log.rows.push_back(row);

        if (k == steps) break;
        try {
            for (int s = 0; s < cfg.sim_substeps; ++s) {
                x = rk4_step(sc.sys, x, row.u_act, sub_dt);
            }
        } catch (const Error& e) {
            log.outcome = RunOutcome::AbortedNumerical;
            log.failure_message = e.what();
            return log;
        }
    }
    return log;
}

InvarianceReport invariance_report(const TrajectoryLog& log, double tol) {
    InvarianceReport rep;
    rep.tol = tol;
    if (log.rows.empty()) return rep;

    const int num_h = static_cast<int>(log.rows.front().h.size());
    rep.min_h.assign(num_h, std::numeric_limits<double>::infinity());
    rep.min_h_time.assign(num_h, 0.0);

    for (int i = 0; i < num_h; ++i) {
        if (log.rows.front().h(i) < 0.0) rep.started_outside = true;
    }

    bool recovered = !rep.started_outside;
    bool violated_after_recovery = false;
    double active_total = 0.0;
    for (const auto& row : log.rows) {
        for (int i = 0; i < num_h; ++i) {
            const double hi = row.h(i);
            if (hi < rep.min_h[i]) {
                rep.min_h[i] = hi;
                rep.min_h_time[i] = row.t;
            }
            if (hi < -tol && rep.first_violation_index < 0) {
                rep.first_violation_time = row.t;
                rep.first_violation_index = i;
            }
            if (recovered && hi < -tol) violated_after_recovery = true;
        }
        if (!recovered && row.h.minCoeff() >= 0.0) {
            recovered = true;
            rep.recovery_time = row.t;
        }
        rep.max_perturbation = std::max(rep.max_perturbation, row.perturbation);
        active_total += static_cast<double>(row.active_set.size());
    }
    rep.mean_active_set_size = active_total / static_cast<double>(log.rows.size());

    if (log.outcome != RunOutcome::Completed) {
        rep.safe = false;
    } else if (rep.started_outside) {
        // stability-of-C reading: must reach C and then stay (within tol)
        rep.safe = recovered && !violated_after_recovery;
    } else {
        rep.safe = rep.first_violation_index < 0;
    }
    return rep;
}

EcbfBoundReport ecbf_bound_report(const TrajectoryLog& log, const Scenario& sc,
                                  double tol) {
    EcbfBoundReport rep;
    if (sc.designs.empty() || log.rows.size() < 2) return rep;
    rep.applicable = true;

    const double dt = log.rows[1].t - log.rows[0].t;
    const int offset = static_cast<int>(sc.barriers.size());

    for (size_t j = 0; j < sc.designs.size(); ++j) {
        const auto& d = sc.designs[j];
        const Vec eta0 = eta_b(d.chain, log.rows.front().x);
        const Mat step = (d.closed_loop_matrix() * dt).exp();
        Mat phi = Mat::Identity(d.chain.r, d.chain.r);
        for (const auto& row : log.rows) {
            const double bound = d.C_out.dot(phi * eta0);
            const double margin = row.h(offset + static_cast<int>(j)) - bound;
            if (margin < rep.worst_margin) {
                rep.worst_margin = margin;
                rep.worst_time = row.t;
                rep.worst_design = static_cast<int>(j);
            }
            if (margin < -tol) rep.pass = false;
            phi = phi * step;
        }
    }
    return rep;
}

}  // namespace safectl
