#include "safectl/ecbf.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "safectl/errors.hpp"
#include "safectl/integrate.hpp"

namespace safectl {

namespace {

// Ascending coefficients of prod_i (s + p_i); conv with (p, 1) per factor.
std::vector<double> pole_polynomial(const Vec& poles) {
    std::vector<double> c{1.0};
    for (int i = 0; i < poles.size(); ++i) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (size_t j = 0; j < c.size(); ++j) {
            next[j] += poles(i) * c[j];
            next[j + 1] += c[j];
        }
        c = std::move(next);
    }
    return c;
}

std::string brief(const Vec& x) {
    std::ostringstream os;
    os << "[" << x.transpose() << "]";
    return os.str();
}

}  // namespace

void companion_matrices(int r, Mat& F, Vec& G, RowVec& C_out) {
    if (r < 1) throw InvalidArgument("companion_matrices: relative degree must be >= 1");
    F = Mat::Zero(r, r);
    for (int i = 0; i + 1 < r; ++i) F(i, i + 1) = 1.0;
    G = Vec::Zero(r);
    G(r - 1) = 1.0;
    C_out = RowVec::Zero(r);
    C_out(0) = 1.0;
}

RowVec gains_from_poles(const Vec& poles) {
    if (poles.size() == 0) throw InvalidPoles("gains_from_poles: empty pole list");
    for (int i = 0; i < poles.size(); ++i) {
        if (!(poles(i) > 0.0)) {
            throw InvalidPoles("gains_from_poles: pole " + std::to_string(i) + " = " +
                               std::to_string(poles(i)) + " is not positive");
        }
    }
    const std::vector<double> c = pole_polynomial(poles);
    // c = (alpha_1, ..., alpha_r, 1); drop the monic leading coefficient.
    RowVec k(poles.size());
    for (int i = 0; i < poles.size(); ++i) k(i) = c[static_cast<size_t>(i)];
    return k;
}

EcbfDesign make_ecbf_design(LieChain chain, const Vec& poles) {
    if (chain.r < 1) throw InvalidArgument("ecbf design: relative degree must be >= 1");
    if (static_cast<int>(chain.lf_powers.size()) != chain.r + 1) {
        throw InvalidArgument("ecbf design: chain needs lf_powers[0..r], got " +
                              std::to_string(chain.lf_powers.size()) + " entries for r = " +
                              std::to_string(chain.r));
    }
    for (const auto& fk : chain.lf_powers) {
        if (!fk) throw InvalidArgument("ecbf design: empty lf_power entry");
    }
    if (!chain.lglf) throw InvalidArgument("ecbf design: missing lglf");
    if (poles.size() != chain.r) {
        throw InvalidPoles("ecbf design: need " + std::to_string(chain.r) + " poles, got " +
                           std::to_string(poles.size()));
    }

    EcbfDesign d;
    d.chain = std::move(chain);
    d.poles = poles;
    d.K_alpha = gains_from_poles(poles);
    companion_matrices(d.chain.r, d.F, d.G, d.C_out);
    return d;
}

Vec eta_b(const LieChain& chain, const Vec& x) {
    Vec eta(chain.r);
    for (int k = 0; k < chain.r; ++k) {
        eta(k) = chain.lf_powers[static_cast<size_t>(k)](x);
        if (!std::isfinite(eta(k))) {
            throw NumericalFailure("eta_b: L_f^" + std::to_string(k) + " h nonfinite at " +
                                   brief(x));
        }
    }
    return eta;
}

Vec nu_chain(const EcbfDesign& design, const Vec& x) {
    const int r = design.chain.r;
    Vec lf(r + 1);
    for (int k = 0; k <= r; ++k) lf(k) = design.chain.lf_powers[static_cast<size_t>(k)](x);

    // nu_i = sum_j coeff_j(prod_{l<=i}(s + p_l)) * L_f^j h; the recursion
    // nu_i = nudot_{i-1} + p_i nu_{i-1} telescopes into exactly these
    // convolution coefficients.
    Vec nu(r + 1);
    std::vector<double> c{1.0};
    nu(0) = lf(0);
    for (int i = 1; i <= r; ++i) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (size_t j = 0; j < c.size(); ++j) {
            next[j] += design.poles(i - 1) * c[j];
            next[j + 1] += c[j];
        }
        c = std::move(next);
        double v = 0.0;
        for (size_t j = 0; j < c.size(); ++j) v += c[j] * lf(static_cast<int>(j));
        nu(i) = v;
    }
    return nu;
}

InitialStateValidation validate_initial_state(const EcbfDesign& design, const Vec& x0) {
    const double h0 = design.chain.h(x0);
    if (h0 < 0.0) {
        throw OutsideSafeSet("initial state outside the safe set: h(x0) = " +
                             std::to_string(h0) + " at " + brief(x0));
    }
    InitialStateValidation out;
    out.nu_values = nu_chain(design, x0);
    out.valid = true;
    for (int i = 0; i < design.chain.r; ++i) {
        if (out.nu_values(i) < -1e-12) {
            out.valid = false;
            out.witness = i;
            break;
        }
    }
    return out;
}

ConstraintRow ecbf_constraint_row(const EcbfDesign& design, const Vec& x) {
    const int r = design.chain.r;
    ConstraintRow row;
    row.a = design.chain.lglf(x);
    detail::require_finite(row.a, "L_g L_f^(r-1) h");
    if (row.a.norm() <= 1e-12) {
        throw RelativeDegreeViolation("L_g L_f^" + std::to_string(r - 1) +
                                      " h vanished at " + brief(x) +
                                      "; stated relative degree " + std::to_string(r) +
                                      " does not hold here");
    }
    const double lfr = design.chain.lf_powers[static_cast<size_t>(r)](x);
    if (!std::isfinite(lfr)) throw NumericalFailure("L_f^r h nonfinite at " + brief(x));
    row.b_rhs = -lfr - design.K_alpha.dot(eta_b(design.chain, x));
    return row;
}

ClfEcbfResult clf_ecbf_qp(const ControlAffineSystem& sys, const LyapunovSpec& lyapunov,
                          const std::vector<EcbfDesign>& designs, const Mat& H_cost,
                          double p_relax, const Vec& x) {
    if (designs.empty()) throw InvalidArgument("clf_ecbf_qp: no designs");
    std::vector<ConstraintRow> rows;
    rows.reserve(designs.size());
    for (const auto& d : designs) rows.push_back(ecbf_constraint_row(d, x));

    const UnifiedResult base = solve_unified(sys, lyapunov, rows, H_cost, p_relax, x);

    ClfEcbfResult out;
    out.u = base.u;
    out.delta = base.delta;
    out.qp = base.qp;
    out.mu.resize(static_cast<int>(designs.size()));
    for (size_t i = 0; i < designs.size(); ++i) {
        const auto& d = designs[i];
        const double drift = d.chain.lf_powers[static_cast<size_t>(d.chain.r)](x);
        out.mu(static_cast<int>(i)) = drift + d.chain.lglf(x).dot(out.u);
    }
    return out;
}

ChainConsistencyReport check_chain_consistency(const LieChain& chain,
                                               const ControlAffineSystem& sys,
                                               const std::vector<Vec>& samples) {
    constexpr double kStep = 1e-5;
    constexpr double kRelTol = 1e-3;
    const VectorField drift = [&sys](const Vec& x) { return sys.eval_f(x); };

    ChainConsistencyReport rep;
    for (const Vec& x : samples) {
        if (chain.lglf(x).norm() <= 1e-12) rep.lglf_nonzero = false;
        const Vec xp = rk4_step(drift, x, kStep);
        const Vec xm = rk4_step(drift, x, -kStep);
        for (int k = 0; k + 1 <= chain.r; ++k) {
            ChainSample s;
            s.x = x;
            s.order = k;
            s.analytic = chain.lf_powers[static_cast<size_t>(k + 1)](x);
            s.numeric = (chain.lf_powers[static_cast<size_t>(k)](xp) -
                         chain.lf_powers[static_cast<size_t>(k)](xm)) /
                        (2.0 * kStep);
            s.rel_error = std::abs(s.numeric - s.analytic) /
                          std::max(1.0, std::abs(s.analytic));
            s.pass = s.rel_error <= kRelTol;
            if (!s.pass) rep.pass = false;
            rep.samples.push_back(std::move(s));
        }
    }
    if (!rep.lglf_nonzero) rep.pass = false;
    return rep;
}

}  // namespace safectl
