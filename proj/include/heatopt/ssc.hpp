#pragma once

#include <vector>

#include "heatopt/optimizer.hpp"

namespace heatopt {

struct SscOptions {
    double eps_act_rel = 1e-6;  ///< switching threshold relative to max |alpha q + B*z|
    double eps_bound = 1e-10;   ///< distance below which a coefficient sits on a bound
    double tol = 1e-8;          ///< MINRES relative residual
    int max_iterations = 5000;
};

/// Control coefficients that are not strongly active, as linear indices into the
/// coefficient matrix.
struct FreeSet {
    std::vector<Eigen::Index> index;
    Eigen::Index total = 0;
    double eps_act = 0.0;

    double fraction() const { return total > 0 ? double(index.size()) / double(total) : 0.0; }
    Vec restrict(const Mat& m) const;
    Mat extend(const Vec& v, Eigen::Index rows, Eigen::Index cols) const;
};

/// Free iff not (on a bound and |alpha q + B*z| > eps_act).
FreeSet build_free_set(const ProblemData& pd, Iterate& it, double mu, const SscOptions& opts = {});

/// Saddle-point operator [H_FF d_F; d_F^T 0] in raw coordinates, acting on (p, dmu).
class KktOperator {
public:
    KktOperator(const ProblemData& pd, Iterate& it, double mu, FreeSet free);

    Eigen::Index rows() const { return Eigen::Index(free_.index.size()) + 1; }
    Eigen::Index cols() const { return rows(); }
    Vec apply(const Vec& x) const;
    Vec operator*(const Vec& x) const { return apply(x); }

    /// Right side (-d_nu d_q L restricted, -d_nu g).
    Vec rhs() const;
    /// Block-diagonal SPD preconditioner: alpha nu W on q, its Schur complement on mu.
    Vec precondition(const Vec& r) const;

    const FreeSet& free_set() const { return free_; }
    const Vec& constraint_row() const { return d_; }
    double dnu_g() const { return dnu_g_; }
    mutable int applications = 0;

private:
    const ProblemData& pd_;
    Iterate& it_;
    double mu_;
    FreeSet free_;
    Vec d_;          ///< raw d_q g on the free set
    double dnu_g_;   ///< raw d_nu g
    Vec mix_;        ///< raw d_nu d_q L on the free set
    Vec diag_;       ///< alpha nu W on the free set
    double schur_;
};

struct KktSolution {
    Vec x;  ///< (dq on the free set, dmu)
    int iterations = 0;
    double residual = 0.0;  ///< true relative residual |Kx - b| / |b|
    bool converged = false;
};

/// Preconditioned MINRES from the start vector x0 (zero if empty).
KktSolution solve_kkt(const KktOperator& K, const SscOptions& opts = {}, const Vec& x0 = Vec());

/// (gamma / 3) min(alpha nu / (gamma + c1), 1); NaN unless gamma > 0.
double kappa_lower(double gamma, double c1, double alpha, double nu);

struct SscReport {
    double gamma = 0.0;
    double kappa_lower = 0.0;
    double c1 = 0.0;
    double dq_norm = 0.0;
    double dmu = 0.0;
    int minres_iterations = 0;
    double residual = 0.0;
    bool minres_converged = false;
    double inactive_fraction = 0.0;
    double alpha = 0.0;
    double nu = 0.0;
    double mu = 0.0;
    int M = 0;
    int N = 0;
};

/// Second order check at a converged solution (nu, q, mu).
SscReport ssc_check(const ProblemData& pd, double nu, const ControlFunction& q, double mu,
                    const SscOptions& opts = {});
SscReport ssc_check(const ProblemData& pd, const SolveReport& rep, const SscOptions& opts = {});

}  // namespace heatopt
