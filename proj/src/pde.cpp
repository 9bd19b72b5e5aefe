#include "heatopt/pde.hpp"

namespace heatopt {

namespace {

void check_nu(double nu) {
    if (!(nu > 0.0)) throw std::domain_error("time scaling nu must be positive");
}

void check_columns(const Mat& a, const FemOperators& ops, int M, const char* what) {
    if (a.rows() != ops.num_dofs() || a.cols() != M) throw ConfigError(std::string(what) + ": shape mismatch");
}

}  // namespace

Trajectory solve_forward(const FemOperators& ops, const TimeGrid& grid, double nu, const Vec& initial,
                         const Mat& rhs) {
    check_nu(nu);
    const int M = grid.M();
    check_columns(rhs, ops, M, "solve_forward");
    if (initial.size() != ops.num_dofs()) throw ConfigError("solve_forward: initial value has wrong length");
    Trajectory tr;
    tr.grid = grid;
    tr.initial = initial;
    tr.values.resize(ops.num_dofs(), M);
    if (ops.num_dofs() == 0) return tr;
    Vec prev = initial;
    for (int m = 0; m < M; ++m) {
        const auto factor = ops.step_factor(nu, grid.k[m]);
        Vec b = ops.M * prev + rhs.col(m);
        tr.values.col(m) = factor->solve(b);
        prev = tr.values.col(m);
    }
    return tr;
}

Trajectory solve_backward(const FemOperators& ops, const TimeGrid& grid, double nu, const Vec& terminal_load,
                          const Mat& sources) {
    check_nu(nu);
    const int M = grid.M();
    const bool has_source = sources.size() > 0;
    if (has_source) check_columns(sources, ops, M, "solve_backward");
    if (terminal_load.size() != ops.num_dofs()) throw ConfigError("solve_backward: terminal has wrong length");
    Trajectory tr;
    tr.grid = grid;
    tr.values.resize(ops.num_dofs(), M);
    tr.initial = Vec::Zero(ops.num_dofs());
    if (ops.num_dofs() == 0) return tr;
    Vec b = terminal_load;
    for (int m = M - 1; m >= 0; --m) {
        if (m < M - 1) b = ops.M * tr.values.col(m + 1);
        if (has_source) b += sources.col(m);
        tr.values.col(m) = ops.step_factor(nu, grid.k[m])->solve(b);
    }
    return tr;
}

Trajectory solve_state(const FemOperators& ops, const TimeGrid& grid, double nu, const Mat& loads, const Vec& u0) {
    check_columns(loads, ops, grid.M(), "solve_state");
    Mat rhs(loads.rows(), loads.cols());
    for (int m = 0; m < grid.M(); ++m) rhs.col(m) = (nu * grid.k[m]) * loads.col(m);
    return solve_forward(ops, grid, nu, u0, rhs);
}

Trajectory solve_state(const FemOperators& ops, const ControlSpace& space, double nu, const ControlFunction& q,
                       const Vec& u0) {
    return solve_state(ops, q.grid, nu, control_loads(space, ops, q), u0);
}

Trajectory solve_linearized_state(const FemOperators& ops, double nu, const Mat& loads, const Trajectory& base,
                                  double dnu, const Mat& dloads) {
    const TimeGrid& grid = base.grid;
    const int M = grid.M();
    check_columns(loads, ops, M, "solve_linearized_state");
    check_columns(dloads, ops, M, "solve_linearized_state");
    Mat rhs(ops.num_dofs(), M);
    for (int m = 0; m < M; ++m) {
        rhs.col(m) = (grid.k[m] * nu) * dloads.col(m);
        if (dnu != 0.0) rhs.col(m) += (grid.k[m] * dnu) * (loads.col(m) - ops.K * base.values.col(m));
    }
    return solve_forward(ops, grid, nu, Vec::Zero(ops.num_dofs()), rhs);
}

Trajectory solve_linearized_state(const FemOperators& ops, const ControlSpace& space, double nu,
                                  const ControlFunction& q, const Trajectory& base, double dnu,
                                  const ControlFunction& dq) {
    if (!(q.grid == base.grid) || !(dq.grid == base.grid)) throw ConfigError("time grid mismatch");
    return solve_linearized_state(ops, nu, control_loads(space, ops, q), base, dnu, space.map->E * dq.coeffs);
}

Trajectory solve_second_linearized_state(const FemOperators& ops, double nu, double dnu1, const Mat& dloads1,
                                         const Trajectory& du1, double dnu2, const Mat& dloads2,
                                         const Trajectory& du2) {
    const TimeGrid& grid = du1.grid;
    if (!(du2.grid == grid)) throw ConfigError("time grid mismatch");
    const int M = grid.M();
    check_columns(dloads1, ops, M, "solve_second_linearized_state");
    check_columns(dloads2, ops, M, "solve_second_linearized_state");
    Mat rhs = Mat::Zero(ops.num_dofs(), M);
    for (int m = 0; m < M; ++m) {
        if (dnu1 != 0.0) rhs.col(m) += (grid.k[m] * dnu1) * (dloads2.col(m) - ops.K * du2.values.col(m));
        if (dnu2 != 0.0) rhs.col(m) += (grid.k[m] * dnu2) * (dloads1.col(m) - ops.K * du1.values.col(m));
    }
    return solve_forward(ops, grid, nu, Vec::Zero(ops.num_dofs()), rhs);
}

Trajectory solve_adjoint(const FemOperators& ops, const TimeGrid& grid, double nu, double mu, const Vec& u_terminal,
                         const Vec& ud) {
    const Vec load = mu * (ops.M * (u_terminal - ud));
    return solve_backward(ops, grid, nu, load, Mat());
}

Trajectory solve_backward_with_source(const FemOperators& ops, const TimeGrid& grid, double nu,
                                      const Trajectory& source, const Vec& terminal) {
    if (!(source.grid == grid)) throw ConfigError("time grid mismatch");
    check_columns(source.values, ops, grid.M(), "solve_backward_with_source");
    Mat loads = ops.M * source.values;
    for (int m = 0; m < grid.M(); ++m) loads.col(m) *= nu * grid.k[m];
    return solve_backward(ops, grid, nu, ops.M * terminal, loads);
}

}  // namespace heatopt
