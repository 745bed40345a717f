#include "safectl/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <bit>
#include <cmath>
#include <limits>

namespace safectl {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-10;
constexpr int kMaxDim = 8;
constexpr int kMaxRows = 8;

/// Appends box rows to (A, b): for each coordinate, a lo row e_i.z >= lo_i
/// then a hi row -e_i.z >= -hi_i, finite bounds only.
void compile_rows(const QpProblem& p, Mat& A, Vec& b) {
    const int d = p.dim();
    const int k = p.num_rows();
    int extra = 0;
    if (p.bounds) {
        for (int i = 0; i < d; ++i) {
            if (std::isfinite(p.bounds->lo(i))) ++extra;
            if (std::isfinite(p.bounds->hi(i))) ++extra;
        }
    }
    A.resize(k + extra, d);
    b.resize(k + extra);
    if (k > 0) {
        A.topRows(k) = p.ineq_A;
        b.head(k) = p.ineq_b;
    }
    int r = k;
    if (p.bounds) {
        for (int i = 0; i < d; ++i) {
            if (std::isfinite(p.bounds->lo(i))) {
                A.row(r).setZero();
                A(r, i) = 1.0;
                b(r) = p.bounds->lo(i);
                ++r;
            }
            if (std::isfinite(p.bounds->hi(i))) {
                A.row(r).setZero();
                A(r, i) = -1.0;
                b(r) = -p.bounds->hi(i);
                ++r;
            }
        }
    }
}

double kkt_residual(const QpProblem& p, const Mat& A, const Vec& b, const Vec& z, const Vec& lam) {
    const Vec stationarity = p.H * z + p.c - A.transpose() * lam;
    const Vec slack = A * z - b;
    double r = stationarity.lpNorm<Eigen::Infinity>();
    for (int i = 0; i < lam.size(); ++i) {
        r = std::max(r, std::abs(lam(i) * slack(i)));   // complementarity
        r = std::max(r, std::max(0.0, -slack(i)));      // primal feasibility
        r = std::max(r, std::max(0.0, -lam(i)));        // dual feasibility
    }
    return r;
}

}  // namespace

const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::Infeasible: return "infeasible";
        case QpStatus::Degenerate: return "degenerate";
    }
    return "?";
}

void QpProblem::validate() const {
    const int d = dim();
    if (d < 1 || H.cols() != d || c.size() != d)
        throw InvalidArgument("QpProblem: inconsistent H/c shapes");
    if (ineq_A.rows() != ineq_b.size() || (ineq_A.rows() > 0 && ineq_A.cols() != d))
        throw InvalidArgument("QpProblem: inconsistent constraint shapes");
    if (d > kMaxDim) throw InvalidArgument("QpProblem: d > 8 outside the small-problem contract");
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw InvalidArgument("QpProblem: H not symmetric within 1e-12");
    Eigen::LLT<Mat> llt(H);
    if (llt.info() != Eigen::Success)
        throw InvalidArgument("QpProblem: H not positive definite (Cholesky failed)");
    Mat A;
    Vec b;
    compile_rows(*this, A, b);
    if (A.rows() > kMaxRows)
        throw InvalidArgument("QpProblem: more than 8 rows after box compilation");
}

Vec solve_minnorm_single(const Vec& nominal, const Vec& a, double b_rhs) {
    if (a.size() != nominal.size())
        throw InvalidArgument("solve_minnorm_single: dimension mismatch");
    const double an = a.dot(nominal);
    if (an >= b_rhs) return nominal;
    if (a.norm() <= 1e-12) {
        throw InfeasiblePointwise(
            "constraint row vanished (L_g h = 0) with the drift condition violated");
    }
    return nominal + ((b_rhs - an) / a.squaredNorm()) * a;
}

QpSolution solve_active_set(const QpProblem& p) {
    p.validate();
    const int d = p.dim();

    Mat A;
    Vec b;
    compile_rows(p, A, b);
    const int k = static_cast<int>(A.rows());

    QpSolution out;
    out.duals = Vec::Zero(k);
    double worst_rcond = std::numeric_limits<double>::infinity();
    bool any_solvable = false;

    for (unsigned mask = 0; mask < (1u << k); ++mask) {
        const int na = static_cast<int>(std::popcount(mask));
        if (na > d) continue;  // KKT necessarily rank-deficient

        // KKT system  [H  -As^T; As  0] [z; lam] = [-c; bs]
        Mat kkt = Mat::Zero(d + na, d + na);
        Vec rhs(d + na);
        kkt.topLeftCorner(d, d) = p.H;
        rhs.head(d) = -p.c;
        int r = 0;
        std::vector<int> subset;
        subset.reserve(na);
        for (int i = 0; i < k; ++i) {
            if (mask & (1u << i)) {
                kkt.block(d + r, 0, 1, d) = A.row(i);
                kkt.block(0, d + r, d, 1) = -A.row(i).transpose();
                rhs(d + r) = b(i);
                subset.push_back(i);
                ++r;
            }
        }

        Eigen::FullPivLU<Mat> lu(kkt);
        if (!lu.isInvertible()) {
            worst_rcond = std::min(worst_rcond, lu.rcond());
            continue;
        }
        any_solvable = true;
        const Vec sol = lu.solve(rhs);
        const Vec z = sol.head(d);

        Vec lam = Vec::Zero(k);
        bool duals_ok = true;
        for (int i = 0; i < na; ++i) {
            lam(subset[i]) = sol(d + i);
            if (sol(d + i) < -kDualTol) duals_ok = false;
        }
        if (!duals_ok) continue;

        const Vec slack = A * z - b;
        if (k > 0 && slack.minCoeff() < -kPrimalTol) continue;

        out.z_star = z;
        out.active_set = subset;
        out.duals = lam;
        out.kkt_residual = kkt_residual(p, A, b, z, lam);
        out.status = QpStatus::Optimal;
        return out;
    }

    out.status = any_solvable ? QpStatus::Infeasible : QpStatus::Degenerate;
    out.condition_estimate = std::isfinite(worst_rcond) ? worst_rcond : 0.0;
    return out;
}

}  // namespace safectl
