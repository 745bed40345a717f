#pragma once

#include <functional>
#include <vector>

#include "safectl/certificates.hpp"
#include "safectl/filters.hpp"
#include "safectl/system.hpp"

namespace safectl {

/// Analytic Lie-derivative chain of a barrier with relative degree r:
/// lf_powers[k] = L_f^k h for k = 0..r (so lf_powers[0] is h itself) and
/// lglf = L_g L_f^{r-1} h. Chains are scenario-supplied analytic functions;
/// nested numeric differentiation amplifies noise beyond usable tolerance, so
/// consistency is verified numerically instead (check_chain_consistency).
struct LieChain {
    int r = 1;
    std::vector<std::function<double(const Vec&)>> lf_powers;
    std::function<Vec(const Vec&)> lglf;

    double h(const Vec& x) const { return lf_powers[0](x); }
};

/// Pole-placed exponential CBF design. The companion pair (F, G) with output
/// selector C_out models the chain eta_b = (h, hdot, ..., h^(r-1)); the gain
/// row K_alpha places the eigenvalues of F - G K_alpha at -p_i (all p_i > 0,
/// so the closed-loop chain matrix is Hurwitz).
struct EcbfDesign {
    LieChain chain;
    Vec poles;
    RowVec K_alpha;
    Mat F;
    Vec G;
    RowVec C_out;

    Mat closed_loop_matrix() const { return F - G * K_alpha; }
};

/// F with superdiagonal ones, G = e_r, C_out = e_1^T. Throws InvalidArgument
/// for r < 1.
void companion_matrices(int r, Mat& F, Vec& G, RowVec& C_out);

/// Coefficients (alpha_1, ..., alpha_r) of prod_i (s + p_i) =
/// s^r + alpha_r s^(r-1) + ... + alpha_1, by iterated convolution of the
/// linear factors. Throws InvalidPoles on a nonpositive pole.
RowVec gains_from_poles(const Vec& poles);

EcbfDesign make_ecbf_design(LieChain chain, const Vec& poles);

/// eta_b(x) = (h, hdot, ..., h^(r-1)) stacked from the chain.
Vec eta_b(const LieChain& chain, const Vec& x);

/// The recursion nu_0 = h, nu_i = nudot_{i-1} + p_i nu_{i-1}, expanded into a
/// linear combination of chain entries. Entries 0..r-1 are input-independent;
/// entry r carries only the drift part (the input term lives in the
/// constraint row).
Vec nu_chain(const EcbfDesign& design, const Vec& x);

struct InitialStateValidation {
    bool valid = false;
    int witness = -1;  // first index i with nu_i(x0) < -1e-12
    Vec nu_values;
};

/// Direct set-membership form of the initial-condition requirement:
/// nu_i(x0) >= -1e-12 for i = 0..r-1. Throws OutsideSafeSet when h(x0) < 0.
InitialStateValidation validate_initial_state(const EcbfDesign& design, const Vec& x0);

/// a = L_g L_f^(r-1) h(x), b_rhs = -L_f^r h(x) - K_alpha . eta_b(x).
/// Throws RelativeDegreeViolation when ||a|| <= 1e-12.
ConstraintRow ecbf_constraint_row(const EcbfDesign& design, const Vec& x);

struct ClfEcbfResult {
    Vec u;
    Vec mu;  // one virtual input per design, reported post hoc
    double delta = 0.0;
    QpSolution qp;
};

/// The three-row program over (u, mu, delta) with mu eliminated through the
/// equality mu = L_f^r h + L_g L_f^(r-1) h . u; the reduced (u, delta)
/// program has the same argmin. Multiple designs stack their rows into one QP.
ClfEcbfResult clf_ecbf_qp(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov,
                          const std::vector<EcbfDesign>& designs, const Mat& H_cost,
                          double p_relax, const Vec& x);

struct ChainSample {
    Vec x;
    int order = 0;            // which lf_power was differenced
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
    bool pass = false;
};

struct ChainConsistencyReport {
    std::vector<ChainSample> samples;
    bool pass = true;
    bool lglf_nonzero = true;
};

/// Verifies lf_powers[k+1] against a central difference of lf_powers[k] along
/// the drift flow (RK4 step 1e-5), relative tolerance 1e-3, and that lglf does
/// not vanish at the samples.
ChainConsistencyReport check_chain_consistency(const LieChain& chain,
                                               const ControlAffineSystem& sys,
                                               const std::vector<Vec>& samples);

}  // namespace safectl
