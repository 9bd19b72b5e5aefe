#pragma once

#include "heatopt/controldisc.hpp"
#include "heatopt/fem.hpp"

namespace heatopt {

/// dG(0) trajectory: column m of `values` is the value on interval m + 1,
/// which equals the value at t_{m+1}.
struct Trajectory {
    TimeGrid grid;
    Vec initial;
    Mat values;

    int M() const { return grid.M(); }
    Vec terminal() const { return values.col(values.cols() - 1); }
};

/// (M + nu k_m K) U_m = M U_{m-1} + rhs_m, m = 1..M.
Trajectory solve_forward(const FemOperators& ops, const TimeGrid& grid, double nu, const Vec& initial,
                         const Mat& rhs);

/// (M + nu k_M K) Z_M = terminal_load + s_M and (M + nu k_m K) Z_m = M Z_{m+1} + s_m.
/// `sources` may be empty (no source).
Trajectory solve_backward(const FemOperators& ops, const TimeGrid& grid, double nu, const Vec& terminal_load,
                          const Mat& sources);

/// State equation with control loads (column m = int_omega phi_i q_m).
Trajectory solve_state(const FemOperators& ops, const TimeGrid& grid, double nu, const Mat& loads, const Vec& u0);
Trajectory solve_state(const FemOperators& ops, const ControlSpace& space, double nu, const ControlFunction& q,
                       const Vec& u0);

/// Derivative of the state in direction (dnu, dq):
/// rhs_m = k_m [dnu (Bq_m - K U_m) + nu B dq_m], zero initial value.
Trajectory solve_linearized_state(const FemOperators& ops, double nu, const Mat& loads, const Trajectory& base,
                                  double dnu, const Mat& dloads);
Trajectory solve_linearized_state(const FemOperators& ops, const ControlSpace& space, double nu,
                                  const ControlFunction& q, const Trajectory& base, double dnu,
                                  const ControlFunction& dq);

/// Second derivative of the state in directions 1 and 2:
/// rhs_m = k_m [dnu1 (B dq2_m - K dU2_m) + dnu2 (B dq1_m - K dU1_m)], zero initial value.
Trajectory solve_second_linearized_state(const FemOperators& ops, double nu, double dnu1, const Mat& dloads1,
                                         const Trajectory& du1, double dnu2, const Mat& dloads2,
                                         const Trajectory& du2);

/// Adjoint with terminal weight mu: (M + nu k_M K) Z_M = mu M (u_terminal - ud),
/// (M + nu k_m K) Z_m = M Z_{m+1}.
Trajectory solve_adjoint(const FemOperators& ops, const TimeGrid& grid, double nu, double mu, const Vec& u_terminal,
                         const Vec& ud);

/// Backward equation with V_h-valued sources: adds nu k_m M source_m to step m.
/// The terminal value enters as M terminal, like solve_adjoint with mu = 1, ud = 0.
Trajectory solve_backward_with_source(const FemOperators& ops, const TimeGrid& grid, double nu,
                                      const Trajectory& source, const Vec& terminal);

}  // namespace heatopt
