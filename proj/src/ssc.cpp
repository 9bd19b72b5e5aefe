#include "heatopt/ssc.hpp"

#include <cmath>
#include <limits>

#include <unsupported/Eigen/IterativeSolvers>

namespace heatopt {

Vec FreeSet::restrict(const Mat& m) const {
    Vec v(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) v[Eigen::Index(i)] = m.data()[index[i]];
    return v;
}

Mat FreeSet::extend(const Vec& v, Eigen::Index rows, Eigen::Index cols) const {
    Mat m = Mat::Zero(rows, cols);
    for (std::size_t i = 0; i < index.size(); ++i) m.data()[index[i]] = v[Eigen::Index(i)];
    return m;
}

FreeSet build_free_set(const ProblemData& pd, Iterate& it, double mu, const SscOptions& opts) {
    const Mat& q = it.q().coeffs;
    FreeSet f;
    f.total = q.size();
    const auto& b = pd.space.bounds;
    if (!b) {
        f.index.resize(std::size_t(q.size()));
        for (Eigen::Index i = 0; i < q.size(); ++i) f.index[std::size_t(i)] = i;
        return f;
    }
    const Mat sw = grad_L(pd, it, mu).dq / it.nu();  // alpha q + B*z
    f.eps_act = opts.eps_act_rel * sw.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        const double v = q.data()[i];
        const bool on_bound = v <= b->lower + opts.eps_bound || v >= b->upper - opts.eps_bound;
        if (!(on_bound && std::abs(sw.data()[i]) > f.eps_act)) f.index.push_back(i);
    }
    return f;
}

KktOperator::KktOperator(const ProblemData& pd, Iterate& it, double mu, FreeSet free)
    : pd_(pd), it_(it), mu_(mu), free_(std::move(free)) {
    const Direction gg = grad_g_raw(pd, it);
    d_ = free_.restrict(gg.dq);
    dnu_g_ = gg.dnu;
    const Mat& q = it.q().coeffs;
    mix_ = free_.restrict(hess_L_apply_raw(pd, it, mu, Direction{1.0, Mat::Zero(q.rows(), q.cols())}).dq);
    const auto& map = *pd.space.map;
    const Vec l = map.diagonal_mass ? map.mc_diag : Vec(map.Mc * Vec::Ones(map.size()));
    Mat w(q.rows(), q.cols());
    for (int m = 0; m < pd.grid.M(); ++m) w.col(m) = (pd.alpha * it.nu() * pd.grid.k[m]) * l;
    diag_ = free_.restrict(w);
    schur_ = diag_.size() > 0 ? (d_.array().square() / diag_.array()).sum() : 0.0;
    if (!(schur_ > 0.0)) schur_ = 1.0;
}

Vec KktOperator::apply(const Vec& x) const {
    ++applications;
    const Eigen::Index n = Eigen::Index(free_.index.size());
    const Mat& q = it_.q().coeffs;
    const Vec p = x.head(n);
    Vec y(n + 1);
    const Direction h = hess_L_apply_raw(pd_, it_, mu_, Direction{0.0, free_.extend(p, q.rows(), q.cols())});
    y.head(n) = free_.restrict(h.dq) + x[n] * d_;
    y[n] = d_.dot(p);
    return y;
}

Vec KktOperator::rhs() const {
    const Eigen::Index n = Eigen::Index(free_.index.size());
    Vec b(n + 1);
    b.head(n) = -mix_;
    b[n] = -dnu_g_;
    return b;
}

Vec KktOperator::precondition(const Vec& r) const {
    const Eigen::Index n = Eigen::Index(free_.index.size());
    Vec z(n + 1);
    z.head(n) = r.head(n).cwiseQuotient(diag_);
    z[n] = r[n] / schur_;
    return z;
}

namespace {

struct KktPreconditioner {
    const KktOperator* K;
    Vec solve(const Vec& r) const { return K->precondition(r); }
};

}  // namespace

KktSolution solve_kkt(const KktOperator& K, const SscOptions& opts, const Vec& x0) {
    KktSolution s;
    s.x = x0.size() == K.rows() ? x0 : Vec::Zero(K.rows());
    const Vec b = K.rhs();
    Eigen::Index iters = opts.max_iterations;
    double tol = opts.tol;
    Eigen::internal::minres(K, b, s.x, KktPreconditioner{&K}, iters, tol);
    s.iterations = int(iters);
    const double bn = b.norm();
    s.residual = bn > 0.0 ? (K.apply(s.x) - b).norm() / bn : 0.0;
    s.converged = s.residual <= opts.tol;
    return s;
}

double kappa_lower(double gamma, double c1, double alpha, double nu) {
    if (!(gamma > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return gamma / 3.0 * std::min(alpha * nu / (gamma + c1), 1.0);
}

SscReport ssc_check(const ProblemData& pd, double nu, const ControlFunction& q, double mu, const SscOptions& opts) {
    Iterate it(nu, q);
    SscReport r;
    r.alpha = pd.alpha;
    r.nu = nu;
    r.mu = mu;
    r.M = pd.grid.M();
    r.N = int(pd.ops->M_full.rows());
    FreeSet f = build_free_set(pd, it, mu, opts);
    r.inactive_fraction = f.fraction();
    const MixedDerivatives md = hess_L_mixed_representer(pd, it, mu);
    const double mix_norm = norm(md.r_mix, pd.grid, pd.space);
    r.c1 = std::abs(md.d2nu) + 2.0 * mix_norm * mix_norm / (pd.alpha * nu);

    Mat dq = Mat::Zero(q.coeffs.rows(), q.coeffs.cols());
    if (!f.index.empty()) {
        KktOperator K(pd, it, mu, f);
        const KktSolution s = solve_kkt(K, opts);
        r.minres_iterations = s.iterations;
        r.residual = s.residual;
        r.minres_converged = s.converged;
        const Eigen::Index n = Eigen::Index(K.free_set().index.size());
        r.dmu = s.x[n];
        dq = K.free_set().extend(s.x.head(n), dq.rows(), dq.cols());
    } else {
        r.minres_converged = true;
    }
    r.dq_norm = norm(dq, pd.grid, pd.space);
    r.gamma = quadratic_form_L(pd, it, mu, 1.0, dq);
    r.kappa_lower = kappa_lower(r.gamma, r.c1, pd.alpha, nu);
    return r;
}

SscReport ssc_check(const ProblemData& pd, const SolveReport& rep, const SscOptions& opts) {
    return ssc_check(pd, rep.nu, rep.q, rep.mu, opts);
}

}  // namespace heatopt
