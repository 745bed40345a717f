#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "safectl/backup.hpp"
#include "safectl/certificates.hpp"
#include "safectl/ecbf.hpp"
#include "safectl/sim.hpp"
#include "safectl/system.hpp"

namespace safectl {

// ---- parameter sets ----

/// Khepera-style unicycle, state (p_x, p_y, v, psi, omega), inputs
/// (u_l longitudinal force, u_a angular torque). a is the offset from the
/// wheel-base center to the tracked point.
struct UnicycleParams {
    double m = 1.0;
    double I_z = 0.1;
    double a = 0.05;
};

ControlAffineSystem unicycle_system(const UnicycleParams& p);

struct AccParams {
    double tau_hw = 1.8;   // time headway (s)
    double lead_v = 8.0;   // initial lead speed (m/s)
    double lead_x0 = 20.0; // initial gap (m)
};

struct LaneKeepParams {
    double d_max = 1.0;  // half lane width (m)
    double a_max = 2.0;  // max lateral acceleration (m/s^2)
};

struct StonesParams {
    double o1x = 0.0, o1y = 0.0;  // outer circle center
    double o2x = 0.0, o2y = 0.0;  // inner circle center
    double R1 = 1.0;
    double R2 = 0.4;
};

/// Linearized inverted pendulum on a motor-driven cart, state (v, phi, phidot),
/// input u = motor voltage. With F = k_m (u - k_b v) and ct = c_phi / (m_p l):
///   vdot   = (F - c_v v)/M - (m_p g0 / M) phi + (m_p ct / M) phidot
///   phiddot = ((M + m_p) g0 phi - (M + m_p) ct phidot - F + c_v v) / (M l)
struct SegwayLiteParams {
    double M = 1.0;      // cart + wheels mass (kg)
    double m_p = 0.2;    // pendulum mass (kg)
    double l = 0.5;      // pendulum length (m)
    double g0 = 9.8;
    double k_m = 5.0;    // motor force per volt (N/V)
    double k_b = 0.1;    // back-EMF (V s/m)
    double c_v = 0.5;    // cart viscous friction
    double c_phi = 0.01; // pivot damping
    double u_max = 15.0; // voltage bound (V)
    double phi_max = 0.2617993877991494;  // pi/12
    double dphi_max = 6.283185307179586;  // 2 pi
    double v_max = 5.0;
};

ControlAffineSystem segway_lite_system(const SegwayLiteParams& p);

// ---- barrier formulas (exposed for direct testing) ----

/// h_asr = D - tau_hw v_f on the extended ACC state, D = lead_pos - p_f.
double h_asr(const Vec& x, const AccParams& p);

/// h_lk = d_max - sign(v_lat) y_lat - v_lat^2 / (2 a_max), sign(0) := 0.
double h_lk(double y_lat, double v_lat, const LaneKeepParams& p);

/// Annulus barrier values h1 = R1 - |F - O1|, h2 = |F - O2| - R2 together with
/// their r = 2 Lie chains on the planar double integrator. Throws
/// SingularBarrierPoint within 1e-9 of a center.
struct StonesBarriers {
    double h1 = 0.0;
    double h2 = 0.0;
    LieChain chain1;
    LieChain chain2;
};
StonesBarriers stones_barriers(const Vec& x, const StonesParams& p);

// ---- scenario bundle ----

struct Scenario {
    std::string name;
    std::string description;
    ControlAffineSystem sys;
    std::vector<std::string> state_names;

    /// Relative-degree-1 barriers enforced directly by the safety filter.
    std::vector<BarrierSpec> barriers;
    /// Higher-relative-degree barriers enforced through their ECBF rows.
    std::vector<EcbfDesign> designs;
    /// Column names for the log's h entries: barriers first, then designs.
    std::vector<std::string> h_names;

    std::optional<LyapunovSpec> lyapunov;
    std::function<Vec(double t, const Vec& x)> nominal;
    std::optional<BackupCbf> backup;

    std::function<Mat(const Vec&)> H_cost;  // empty -> identity
    double p_relax = 100.0;

    RunConfig defaults;
    std::vector<DisturbanceEvent> events;

    /// States used by gradient/chain consistency diagnostics (chosen away from
    /// the documented nonsmooth points, e.g. v_lat = 0 in h_lk).
    std::vector<Vec> diag_samples;

    /// Override keys this scenario accepts (filled by the builder).
    std::vector<std::string> param_keys;

    int num_h() const { return static_cast<int>(barriers.size() + designs.size()); }
};

// ---- registry ----

using ParamMap = std::map<std::string, double>;

std::vector<std::string> scenario_names();
std::vector<std::string> scenario_param_keys(const std::string& name);

/// Build a registered scenario with optional parameter overrides. Throws
/// UnknownScenario (listing registered names) or ParseError on an unknown
/// parameter key (naming the nearest valid key).
Scenario make_scenario(const std::string& name, const ParamMap& overrides = {});

// individual builders (used by tests; make_scenario dispatches to these)
Scenario make_acc_lk(const ParamMap& overrides = {});
Scenario make_stones(const ParamMap& overrides = {});
Scenario make_segway_lite(const ParamMap& overrides = {});
Scenario make_segway_backup(const ParamMap& overrides = {});
Scenario make_backup_brake(const ParamMap& overrides = {});

}  // namespace safectl
