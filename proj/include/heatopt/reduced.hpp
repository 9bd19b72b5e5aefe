#pragma once

#include <memory>

#include "heatopt/controldisc.hpp"
#include "heatopt/pde.hpp"

namespace heatopt {

/// Discrete time-optimal control problem on one (time grid, mesh) level.
struct ProblemData {
    double alpha = 1.0;
    double delta0 = 0.5;
    std::shared_ptr<const FemOperators> ops;
    ControlSpace space;
    TimeGrid grid;
    Vec u0;  ///< projection of the initial state
    Vec ud;  ///< projection of the target

    /// G(u) = 1/2 |u - ud|^2 - delta0^2 / 2 in the L2 norm of V_h.
    double G(const Vec& u) const;
    /// Throws ConfigError unless alpha, delta0 > 0, shapes agree and G(u0) > 0.
    void validate() const;
};

/// A pair (nu, q) of time scaling and control, or a direction / derivative of
/// the same shape. Derivatives are stored either as Riesz representers in the
/// control inner product or as raw partial derivatives per coefficient.
struct Direction {
    double dnu = 0.0;
    Mat dq;
};

Direction operator+(const Direction& a, const Direction& b);
Direction operator*(double s, const Direction& a);

/// (nu, q) with cached state and unit-weight adjoint. The adjoint for weight
/// mu is mu times the cached one.
class Iterate {
public:
    Iterate() = default;
    Iterate(double nu, ControlFunction q) : nu_(nu), q_(std::move(q)) {}

    double nu() const { return nu_; }
    const ControlFunction& q() const { return q_; }
    void set(double nu, ControlFunction q);

    const Mat& loads(const ProblemData& pd);
    const Trajectory& state(const ProblemData& pd);
    const Trajectory& unit_adjoint(const ProblemData& pd);
    bool state_cached() const { return state_ok_; }
    bool adjoint_cached() const { return adjoint_ok_; }

private:
    double nu_ = 1.0;
    ControlFunction q_;
    bool loads_ok_ = false, state_ok_ = false, adjoint_ok_ = false;
    Mat loads_;
    Trajectory state_, adjoint_;
};

double eval_j(const ProblemData& pd, double nu, const ControlFunction& q);
double eval_g(const ProblemData& pd, Iterate& it);
double eval_g(const ProblemData& pd, double nu, const ControlFunction& q);

/// Raw partial derivatives (d/dnu, d/dq_{c,m}).
Direction grad_j_raw(const ProblemData& pd, Iterate& it);
Direction grad_g_raw(const ProblemData& pd, Iterate& it);

/// Convert raw q-derivatives to representers: Mc^{-1} raw_m / k_m.
Mat to_representer(const ProblemData& pd, const Mat& raw);
Direction to_representer(const ProblemData& pd, const Direction& raw);

/// Gradient of L = j + mu g as (d/dnu, representer nu (alpha q + B* z)).
Direction grad_L(const ProblemData& pd, Iterate& it, double mu);
/// Gradient of g (adjoint with weight 1).
Direction grad_g(const ProblemData& pd, Iterate& it);

/// Hessian of j + mu g applied to d, raw partial derivatives.
/// Costs one linearized forward solve and one backward solve.
Direction hess_L_apply_raw(const ProblemData& pd, Iterate& it, double mu, const Direction& d);
Direction hess_L_apply(const ProblemData& pd, Iterate& it, double mu, const Direction& d);

/// Representer of d_qq L [p, .]: alpha nu p + nu B* w.
Mat hess_L_qq_apply(const ProblemData& pd, Iterate& it, double mu, const Mat& p);

struct MixedDerivatives {
    Mat r_mix;        ///< representer of d_nu d_q L [1, .]
    double d2nu = 0;  ///< d_nu^2 L from forward solves
};
MixedDerivatives hess_L_mixed_representer(const ProblemData& pd, Iterate& it, double mu);

/// d^2 L [(dnu, dq)]^2 from one linearized and one second linearized forward solve.
double quadratic_form_L(const ProblemData& pd, Iterate& it, double mu, double dnu, const Mat& dq);

/// Product inner product dnu_a dnu_b + <dq_a, dq_b>.
double product_inner(const ProblemData& pd, const Direction& a, const Direction& b);

}  // namespace heatopt
