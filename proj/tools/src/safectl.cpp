#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <safectl/backup.hpp>
#include <safectl/config.hpp>
#include <safectl/csv.hpp>
#include <safectl/ecbf.hpp>
#include <safectl/errors.hpp>
#include <safectl/scenarios.hpp>
#include <safectl/sim.hpp>

namespace fs = std::filesystem;
using namespace safectl;

namespace {

constexpr int kExitSafe = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;
constexpr int kExitNumerical = 3;
constexpr double kVerdictTol = 1e-3;

struct CommonFlags {
    std::string config_path;
    std::string scenario;
    std::string controller;
    std::string out_dir;
    double duration = 0.0;
    std::uint64_t seed = 0;
    bool has_scenario = false, has_controller = false, has_out = false;
    bool has_duration = false, has_seed = false;
};

void add_common_options(CLI::App* sub, CommonFlags& fl, bool run_flags) {
    sub->add_option("--config", fl.config_path, "Config file (sectioned key=value)");
    sub->add_option("--scenario", fl.scenario, "Scenario name");
    sub->add_option("--out", fl.out_dir, "Output directory for CSV logs");
    if (run_flags) {
        sub->add_option("--controller", fl.controller,
                        "nominal | safety_filter | clf_cbf_qp | clf_ecbf_qp | "
                        "backup_filter");
        sub->add_option("--duration", fl.duration, "Run length in seconds");
        sub->add_option("--seed", fl.seed, "Seed recorded in the run config");
    }
}

CliConfig assemble_config(const CLI::App* sub, const CommonFlags& fl) {
    CliConfig cfg;
    if (!fl.config_path.empty()) {
        std::ifstream in(fl.config_path);
        if (!in) throw ParseError("cannot read config '" + fl.config_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        cfg = parse_config(ss.str());
    }
    const auto passed = [sub](const char* name) {
        const CLI::Option* opt = sub->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (passed("--scenario")) cfg.scenario = fl.scenario;
    if (passed("--controller")) cfg.controller = fl.controller;
    if (passed("--out")) cfg.out_dir = fl.out_dir;
    if (passed("--duration")) cfg.duration = fl.duration;
    if (passed("--seed")) cfg.seed = fl.seed;
    validate_config(cfg);
    return cfg;
}

RunConfig assemble_run_config(const Scenario& sc, const CliConfig& cfg) {
    RunConfig rc = sc.defaults;
    if (cfg.ctrl_dt) rc.ctrl_dt = *cfg.ctrl_dt;
    if (cfg.duration) rc.duration = *cfg.duration;
    if (cfg.sim_substeps) rc.sim_substeps = *cfg.sim_substeps;
    if (cfg.seed) rc.seed = *cfg.seed;
    if (cfg.x0) {
        rc.x0 = Vec(static_cast<int>(cfg.x0->size()));
        for (size_t i = 0; i < cfg.x0->size(); ++i) rc.x0(i) = (*cfg.x0)[i];
    }
    return rc;
}

struct RunStats {
    double mean_delta = 0.0;
    double max_delta = 0.0;
    int nonzero_delta = 0;
    int backup_steps = 0;
};

RunStats delta_stats(const TrajectoryLog& log) {
    RunStats st;
    int counted = 0;
    for (const auto& r : log.rows) {
        if (std::isfinite(r.delta)) {
            st.mean_delta += r.delta;
            st.max_delta = std::max(st.max_delta, r.delta);
            if (r.delta > 1e-12) ++st.nonzero_delta;
            ++counted;
        }
        if (r.qp_status == "backup_engaged") ++st.backup_steps;
    }
    if (counted > 0) st.mean_delta /= counted;
    return st;
}

int outcome_exit_code(const TrajectoryLog& log, const InvarianceReport& inv) {
    if (log.outcome == RunOutcome::AbortedNumerical) return kExitNumerical;
    if (log.outcome == RunOutcome::AbortedInfeasible) return kExitViolation;
    return inv.safe ? kExitSafe : kExitViolation;
}

std::string ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
    return dir;
}

void print_summary(const Scenario& sc, ControllerKind kind, const RunConfig& rc,
                   const TrajectoryLog& log, const InvarianceReport& inv,
                   double runtime_s, const std::string& csv_path) {
    std::printf("scenario:    %s\n", sc.name.c_str());
    std::printf("controller:  %s\n", to_string(kind));
    std::printf("duration:    %g s   ctrl_dt: %g s   steps: %zu   seed: %llu\n",
                rc.duration, rc.ctrl_dt, log.rows.size(),
                static_cast<unsigned long long>(rc.seed));
    std::printf("runtime:     %.3f s\n", runtime_s);
    switch (log.outcome) {
        case RunOutcome::Completed:
            std::printf("outcome:     completed\n");
            break;
        case RunOutcome::AbortedInfeasible:
            std::printf("outcome:     aborted at t=%.4f — %s\n",
                        log.rows.empty() ? 0.0 : log.rows.back().t,
                        log.failure_message.c_str());
            break;
        case RunOutcome::AbortedNumerical:
            std::printf("outcome:     numerical failure at t=%.4f — %s\n",
                        log.rows.empty() ? 0.0 : log.rows.back().t,
                        log.failure_message.c_str());
            break;
    }
    for (size_t i = 0; i < inv.min_h.size(); ++i) {
        const std::string name =
            i < log.h_names.size() ? log.h_names[i] : "h_" + std::to_string(i);
        std::printf("min %-10s %+.6e at t=%.4f\n", (name + ":").c_str(), inv.min_h[i],
                    inv.min_h_time[i]);
    }
    if (inv.started_outside) {
        if (std::isfinite(inv.recovery_time)) {
            std::printf("recovery:    started with h < 0, reached h >= 0 at t=%.4f\n",
                        inv.recovery_time);
        } else {
            std::printf("recovery:    started with h < 0, never recovered\n");
        }
    }
    if (inv.safe) {
        std::printf("safe:        yes (tol %g)\n", inv.tol);
    } else if (std::isfinite(inv.first_violation_time)) {
        std::printf("safe:        NO — first violation at t=%.4f\n",
                    inv.first_violation_time);
    } else {
        std::printf("safe:        NO\n");
    }

    const RunStats st = delta_stats(log);
    if (kind == ControllerKind::ClfCbfQp || kind == ControllerKind::ClfEcbfQp) {
        std::printf("delta:       mean %.3e   max %.3e   nonzero %d/%zu steps\n",
                    st.mean_delta, st.max_delta, st.nonzero_delta, log.rows.size());
    }
    if (st.backup_steps > 0) {
        std::printf("backup:      engaged %d/%zu steps\n", st.backup_steps,
                    log.rows.size());
    }
    if (!sc.designs.empty() && log.outcome == RunOutcome::Completed &&
        (kind == ControllerKind::SafetyFilter || kind == ControllerKind::ClfEcbfQp ||
         kind == ControllerKind::BackupFilter)) {
        const EcbfBoundReport eb = ecbf_bound_report(log, sc);
        if (eb.applicable) {
            std::printf("ecbf bound:  %s (worst margin %+.3e at t=%.4f, design %d)\n",
                        eb.pass ? "holds" : "VIOLATED", eb.worst_margin, eb.worst_time,
                        eb.worst_design);
        }
    }
    std::printf("log:         %s\n", csv_path.c_str());
}

int cmd_run(const CLI::App* sub, const CommonFlags& fl) {
    const CliConfig cfg = assemble_config(sub, fl);
    const Scenario sc = make_scenario(cfg.scenario, cfg.scenario_params);
    const ControllerKind kind = controller_from_string(cfg.controller);
    const RunConfig rc = assemble_run_config(sc, cfg);

    const auto t0 = std::chrono::steady_clock::now();
    const TrajectoryLog log = run_closed_loop(sc, kind, rc);
    const double runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const InvarianceReport inv = invariance_report(log, kVerdictTol);

    const std::string dir = ensure_out_dir(cfg.out_dir);
    const std::string csv_path =
        (fs::path(dir) / (sc.name + "_" + std::string(to_string(kind)) + ".csv")).string();
    write_csv(log, csv_path);

    print_summary(sc, kind, rc, log, inv, runtime_s, csv_path);
    return outcome_exit_code(log, inv);
}

struct SweepResult {
    double value = 0.0;
    TrajectoryLog log;
    InvarianceReport inv;
    std::string csv_path;
    std::string error;
};

int cmd_sweep(const CLI::App* sub, const CommonFlags& fl) {
    const CliConfig cfg = assemble_config(sub, fl);
    if (!cfg.sweep) {
        throw ParseError("sweep requires a [sweep] section (param = ..., values = ...)");
    }
    const ControllerKind kind = controller_from_string(cfg.controller);
    const std::string dir = ensure_out_dir(cfg.out_dir);
    const std::string& param = cfg.sweep->param;

    std::vector<SweepResult> results(cfg.sweep->values.size());
    std::vector<std::thread> workers;
    for (size_t i = 0; i < cfg.sweep->values.size(); ++i) {
        workers.emplace_back([&, i] {
            SweepResult& res = results[i];
            res.value = cfg.sweep->values[i];
            try {
                ParamMap params = cfg.scenario_params;
                params[param] = res.value;
                const Scenario sc = make_scenario(cfg.scenario, params);
                const RunConfig rc = assemble_run_config(sc, cfg);
                res.log = run_closed_loop(sc, kind, rc);
                res.inv = invariance_report(res.log, kVerdictTol);
                char val[32];
                std::snprintf(val, sizeof(val), "%g", res.value);
                res.csv_path = (fs::path(dir) / (sc.name + "_" + std::string(to_string(kind)) + "_" +
                                                 param + "_" + val + ".csv"))
                                   .string();
                write_csv(res.log, res.csv_path);
            } catch (const std::exception& e) {
                res.error = e.what();
            }
        });
    }
    for (auto& w : workers) w.join();

    std::ostringstream table;
    table << "sweep: " << cfg.scenario << " / " << to_string(kind) << " over " << param
          << "\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%12s %14s %14s %14s  %s\n", param.c_str(),
                  "mean delta", "max delta", "min h", "safe");
    table << line;
    int exit_code = kExitSafe;
    for (const auto& res : results) {
        if (!res.error.empty()) {
            std::snprintf(line, sizeof(line), "%12g  run failed: %s\n", res.value,
                          res.error.c_str());
            table << line;
            exit_code = std::max(exit_code, kExitNumerical);
            continue;
        }
        const RunStats st = delta_stats(res.log);
        double min_h = std::numeric_limits<double>::infinity();
        for (const double h : res.inv.min_h) min_h = std::min(min_h, h);
        std::snprintf(line, sizeof(line), "%12g %14.6e %14.6e %+14.6e  %s\n", res.value,
                      st.mean_delta, st.max_delta, min_h, res.inv.safe ? "yes" : "NO");
        table << line;
        exit_code = std::max(exit_code, outcome_exit_code(res.log, res.inv));
    }
    std::printf("%s", table.str().c_str());
    for (const auto& res : results) {
        if (!res.csv_path.empty()) std::printf("log: %s\n", res.csv_path.c_str());
    }

    const std::string table_path =
        (fs::path(dir) / (cfg.scenario + "_sweep_" + param + ".txt")).string();
    std::ofstream tf(table_path, std::ios::binary);
    if (tf) tf << table.str();
    return exit_code;
}

int cmd_list() {
    for (const auto& name : scenario_names()) {
        const Scenario sc = make_scenario(name);
        std::printf("%-15s %s\n", name.c_str(), sc.description.c_str());
        std::string keys;
        for (const auto& k : sc.param_keys) {
            if (!keys.empty()) keys += ", ";
            keys += k;
        }
        std::printf("%-15s params: %s\n", "", keys.c_str());
    }
    return kExitSafe;
}

int cmd_check(const CLI::App* sub, const CommonFlags& fl) {
    const CliConfig cfg = assemble_config(sub, fl);
    const Scenario sc = make_scenario(cfg.scenario, cfg.scenario_params);
    if (sc.diag_samples.empty()) {
        std::printf("%s: no diagnostic samples registered\n", sc.name.c_str());
        return kExitNumerical;
    }

    bool all_pass = true;
    auto report = [&](const std::string& label, bool pass, double worst) {
        std::printf("%-38s %s (worst deviation %.3e)\n", label.c_str(),
                    pass ? "PASS" : "FAIL", worst);
        all_pass = all_pass && pass;
    };

    for (size_t i = 0; i < sc.barriers.size(); ++i) {
        const auto rep = check_gradient_consistency(sc.barriers[i], sc.diag_samples);
        const std::string name = i < sc.h_names.size() ? sc.h_names[i]
                                                       : "barrier_" + std::to_string(i);
        report("gradient " + name, rep.pass, rep.worst_deviation);
    }
    for (size_t i = 0; i < sc.designs.size(); ++i) {
        const size_t name_idx = sc.barriers.size() + i;
        const std::string name = name_idx < sc.h_names.size()
                                     ? sc.h_names[name_idx]
                                     : "design_" + std::to_string(i);
        const auto rep =
            check_chain_consistency(sc.designs[i].chain, sc.sys, sc.diag_samples);
        double worst = 0.0;
        for (const auto& s : rep.samples) worst = std::max(worst, s.rel_error);
        report("lie chain " + name, rep.pass && rep.lglf_nonzero, worst);
    }
    if (sc.lyapunov) {
        const auto rep = check_gradient_consistency(*sc.lyapunov, sc.diag_samples);
        report("gradient V", rep.pass, rep.worst_deviation);
    }
    if (sc.backup) {
        bool in_box = true;
        for (const auto& x : sc.diag_samples) {
            const Vec u = sc.backup->beta(x);
            if (sc.sys.input_box && !sc.sys.input_box->contains(u, 1e-12)) in_box = false;
        }
        report("backup law within input box", in_box, 0.0);
    }
    return all_pass ? kExitSafe : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"safectl — CBF/CLF safety-filtered scenario simulation"};
    app.require_subcommand(1);

    CommonFlags run_fl, sweep_fl, check_fl;
    CLI::App* run = app.add_subcommand("run", "Simulate one scenario and write a CSV log");
    add_common_options(run, run_fl, true);
    CLI::App* sweep =
        app.add_subcommand("sweep", "Run a scenario across a parameter sweep");
    add_common_options(sweep, sweep_fl, true);
    CLI::App* list =
        app.add_subcommand("list-scenarios", "List registered scenarios and parameters");
    CLI::App* check =
        app.add_subcommand("check", "Run gradient and Lie-chain consistency diagnostics");
    add_common_options(check, check_fl, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fflush(stdout);
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run, run_fl);
        if (sweep->parsed()) return cmd_sweep(sweep, sweep_fl);
        if (list->parsed()) return cmd_list();
        if (check->parsed()) return cmd_check(check, check_fl);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const UnknownScenario& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitUsage;
}
