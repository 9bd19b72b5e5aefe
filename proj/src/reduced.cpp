#include "heatopt/reduced.hpp"

namespace heatopt {

double ProblemData::G(const Vec& u) const {
    const Vec d = u - ud;
    return 0.5 * d.dot(ops->M * d) - 0.5 * delta0 * delta0;
}

void ProblemData::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
    if (!ops) throw ConfigError("problem has no finite element operators");
    if (u0.size() != ops->num_dofs() || ud.size() != ops->num_dofs())
        throw ConfigError("initial state or target has wrong length");
    if (ops->num_dofs() == 0) throw ConfigError("mesh has no interior degrees of freedom");
    if (!(G(u0) > 0.0)) throw ConfigError("initial state already satisfies the terminal constraint");
    if (space.map->E.rows() != ops->num_dofs()) throw ConfigError("control space belongs to another mesh");
}

Direction operator+(const Direction& a, const Direction& b) { return {a.dnu + b.dnu, a.dq + b.dq}; }
Direction operator*(double s, const Direction& a) { return {s * a.dnu, s * a.dq}; }

void Iterate::set(double nu, ControlFunction q) {
    nu_ = nu;
    q_ = std::move(q);
    loads_ok_ = state_ok_ = adjoint_ok_ = false;
}

const Mat& Iterate::loads(const ProblemData& pd) {
    if (!loads_ok_) {
        loads_ = control_loads(pd.space, *pd.ops, q_);
        loads_ok_ = true;
    }
    return loads_;
}

const Trajectory& Iterate::state(const ProblemData& pd) {
    if (!state_ok_) {
        state_ = solve_state(*pd.ops, q_.grid, nu_, loads(pd), pd.u0);
        state_ok_ = true;
    }
    return state_;
}

const Trajectory& Iterate::unit_adjoint(const ProblemData& pd) {
    if (!adjoint_ok_) {
        adjoint_ = solve_adjoint(*pd.ops, q_.grid, nu_, 1.0, state(pd).terminal(), pd.ud);
        adjoint_ok_ = true;
    }
    return adjoint_;
}

double eval_j(const ProblemData& pd, double nu, const ControlFunction& q) {
    const double n2 = inner(q, q, pd.space);
    return nu * (1.0 + 0.5 * pd.alpha * n2);
}

double eval_g(const ProblemData& pd, Iterate& it) { return pd.G(it.state(pd).terminal()); }

double eval_g(const ProblemData& pd, double nu, const ControlFunction& q) {
    Iterate it(nu, q);
    return eval_g(pd, it);
}

Direction grad_j_raw(const ProblemData& pd, Iterate& it) {
    const ControlFunction& q = it.q();
    const Mat mq = pd.space.map->mass_apply(q.coeffs);
    Direction g;
    g.dnu = 1.0 + 0.5 * pd.alpha * inner(q, q, pd.space);
    g.dq = mq;
    for (int m = 0; m < q.M(); ++m) g.dq.col(m) *= pd.alpha * it.nu() * q.grid.k[m];
    return g;
}

Direction grad_g_raw(const ProblemData& pd, Iterate& it) {
    const auto& ops = *pd.ops;
    const Trajectory& U = it.state(pd);
    const Trajectory& Z = it.unit_adjoint(pd);
    const Mat& loads = it.loads(pd);
    const TimeGrid& grid = it.q().grid;
    Direction g;
    g.dnu = 0.0;
    for (int m = 0; m < grid.M(); ++m)
        g.dnu += grid.k[m] * Z.values.col(m).dot(loads.col(m) - ops.K * U.values.col(m));
    g.dq = pd.space.map->E.transpose() * Z.values;
    for (int m = 0; m < grid.M(); ++m) g.dq.col(m) *= it.nu() * grid.k[m];
    return g;
}

Mat to_representer(const ProblemData& pd, const Mat& raw) {
    Mat r = pd.space.map->mass_solve(raw);
    for (int m = 0; m < pd.grid.M(); ++m) r.col(m) /= pd.grid.k[m];
    return r;
}

Direction to_representer(const ProblemData& pd, const Direction& raw) { return {raw.dnu, to_representer(pd, raw.dq)}; }

Direction grad_L(const ProblemData& pd, Iterate& it, double mu) {
    Direction raw = grad_j_raw(pd, it);
    if (mu != 0.0) raw = raw + mu * grad_g_raw(pd, it);
    return to_representer(pd, raw);
}

Direction grad_g(const ProblemData& pd, Iterate& it) { return to_representer(pd, grad_g_raw(pd, it)); }

Direction hess_L_apply_raw(const ProblemData& pd, Iterate& it, double mu, const Direction& d) {
    const auto& ops = *pd.ops;
    const ControlFunction& q = it.q();
    const TimeGrid& grid = q.grid;
    const double nu = it.nu();
    const int M = grid.M();
    const auto& map = *pd.space.map;

    // j'' part.
    Direction h;
    const Mat mq = map.mass_apply(q.coeffs);
    const Mat mdq = map.mass_apply(d.dq);
    h.dnu = 0.0;
    h.dq.resize(d.dq.rows(), M);
    for (int m = 0; m < M; ++m) {
        h.dnu += pd.alpha * grid.k[m] * mq.col(m).dot(d.dq.col(m));
        h.dq.col(m) = (pd.alpha * grid.k[m]) * (d.dnu * mq.col(m) + nu * mdq.col(m));
    }
    if (mu == 0.0) return h;

    // mu g'' part: forward solve for dU, backward solve for W.
    const Trajectory& U = it.state(pd);
    const Trajectory& Z1 = it.unit_adjoint(pd);
    const Mat& loads = it.loads(pd);
    const Mat dloads = map.E * d.dq;
    const Trajectory dU = solve_linearized_state(ops, nu, loads, U, d.dnu, dloads);
    Mat src;
    if (d.dnu != 0.0) {
        src = ops.K * Z1.values;
        for (int m = 0; m < M; ++m) src.col(m) *= -d.dnu * grid.k[m];
    }
    const Trajectory W = solve_backward(ops, grid, nu, ops.M * dU.terminal(), src);
    double hn = 0.0;
    for (int m = 0; m < M; ++m) {
        hn += grid.k[m] * (W.values.col(m).dot(loads.col(m) - ops.K * U.values.col(m)) +
                           Z1.values.col(m).dot(dloads.col(m) - ops.K * dU.values.col(m)));
    }
    Mat comb = nu * W.values + d.dnu * Z1.values;
    Mat hq = map.E.transpose() * comb;
    for (int m = 0; m < M; ++m) hq.col(m) *= grid.k[m];
    h.dnu += mu * hn;
    h.dq += mu * hq;
    return h;
}

Direction hess_L_apply(const ProblemData& pd, Iterate& it, double mu, const Direction& d) {
    return to_representer(pd, hess_L_apply_raw(pd, it, mu, d));
}

Mat hess_L_qq_apply(const ProblemData& pd, Iterate& it, double mu, const Mat& p) {
    return to_representer(pd, hess_L_apply_raw(pd, it, mu, Direction{0.0, p}).dq);
}

MixedDerivatives hess_L_mixed_representer(const ProblemData& pd, Iterate& it, double mu) {
    const auto& ops = *pd.ops;
    const Mat zero = Mat::Zero(pd.space.size(), it.q().M());
    MixedDerivatives out;
    out.r_mix = to_representer(pd, hess_L_apply_raw(pd, it, mu, Direction{1.0, zero}).dq);
    if (mu == 0.0) return out;
    const Trajectory& U = it.state(pd);
    const Mat& loads = it.loads(pd);
    const Mat zl = Mat::Zero(ops.num_dofs(), it.q().M());
    const Trajectory dU = solve_linearized_state(ops, it.nu(), loads, U, 1.0, zl);
    const Trajectory dUU = solve_second_linearized_state(ops, it.nu(), 1.0, zl, dU, 1.0, zl, dU);
    const Vec dT = dU.terminal();
    out.d2nu = mu * (dT.dot(ops.M * dT) + (U.terminal() - pd.ud).dot(ops.M * dUU.terminal()));
    return out;
}

double quadratic_form_L(const ProblemData& pd, Iterate& it, double mu, double dnu, const Mat& dq) {
    const ControlFunction& q = it.q();
    double val = pd.alpha * it.nu() * inner(dq, dq, q.grid, pd.space) +
                 2.0 * pd.alpha * dnu * inner(q.coeffs, dq, q.grid, pd.space);
    if (mu == 0.0) return val;
    const auto& ops = *pd.ops;
    const Trajectory& U = it.state(pd);
    const Mat dloads = pd.space.map->E * dq;
    const Trajectory dU = solve_linearized_state(ops, it.nu(), it.loads(pd), U, dnu, dloads);
    const Trajectory dUU = solve_second_linearized_state(ops, it.nu(), dnu, dloads, dU, dnu, dloads, dU);
    const Vec dT = dU.terminal();
    val += mu * (dT.dot(ops.M * dT) + (U.terminal() - pd.ud).dot(ops.M * dUU.terminal()));
    return val;
}

double product_inner(const ProblemData& pd, const Direction& a, const Direction& b) {
    return a.dnu * b.dnu + inner(a.dq, b.dq, pd.grid, pd.space);
}

}  // namespace heatopt
