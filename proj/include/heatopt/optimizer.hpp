#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatopt/reduced.hpp"

namespace heatopt {

/// The time scaling was driven to the floor nu_min.
struct DegenerateProblemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The trust region collapsed without reaching the inner tolerance.
struct StagnationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    double tol_g = 1e-9;   ///< feasibility |G(u(1))| < tol_g
    double tol_s = 1e-8;   ///< stationarity of the Lagrangian
    double rho0 = 10.0;
    double rho_factor = 10.0;  ///< beta
    double g_decrease = 0.25;  ///< tau_dec
    int max_outer = 60;
    int max_inner = 200;
    int max_cg = 400;
    double nu_min = 1e-6;
    double tr_radius0 = 1.0;
    double tr_shrink = 0.25;
    double tr_grow = 2.0;
    double tr_accept = 0.1;
    double tr_min_radius = 1e-14;
    bool fix_nu = false;  ///< optimize q only, nu stays at its start value
    std::ostream* log = nullptr;  ///< one line per outer iteration
};

struct OuterRecord {
    int outer = 0;
    double g = 0.0;
    double mu = 0.0;
    double rho = 0.0;
    double nu = 0.0;
    int inner_iterations = 0;
    double stationarity = 0.0;
};

struct AugLagState {
    double mu = 0.0;
    double rho = 10.0;
    double last_abs_g = std::numeric_limits<double>::infinity();
    double tol_inner = 1.0;
    std::vector<OuterRecord> history;
};

struct InnerStats {
    int iterations = 0;
    int cg_iterations = 0;
    int gradient_steps = 0;
    int rejected = 0;
    double stationarity = 0.0;
};

struct SolveReport {
    bool converged = false;
    std::string message;
    double nu = 0.0;
    ControlFunction q;
    double mu = 0.0;
    double rho = 0.0;
    double g = 0.0;
    double stationarity = 0.0;           ///< |d_nu L| + projected gradient residual
    double hamiltonian_residual = 0.0;   ///< |d_nu L|
    double projection_residual = 0.0;    ///< |q - P(-B*z/alpha)|
    double multiplier_identity = 0.0;    ///< d_nu j / (-d_nu g)
    int outer_iterations = 0;
    int newton_iterations = 0;
    int cg_iterations = 0;
    int gradient_steps = 0;
    double seconds = 0.0;
    std::vector<OuterRecord> history;
    SolverOptions options;
};

/// AL functional j + ((max(0, mu + rho g))^2 - mu^2) / (2 rho) at fixed (mu, rho).
double augmented_value(const ProblemData& pd, Iterate& it, double mu, double rho);

/// Projected gradient stationarity of the AL functional in the control metric,
/// |d_nu| + |q - P(q - grad_q / (alpha nu))|.
double augmented_stationarity(const ProblemData& pd, Iterate& it, double mu, double rho);

/// mu <- max(0, mu + rho g); rho grows unless |g| fell by the configured factor.
AugLagState auglag_update(AugLagState state, double g_val, const SolverOptions& opts);

/// Trust-region semismooth Newton on the AL functional. Returns the final iterate.
Iterate inner_solve(const ProblemData& pd, Iterate start, double mu, double rho, double tol,
                    const SolverOptions& opts, InnerStats* stats = nullptr);

/// Default start: nu = 1, q = 0 clamped to the bounds.
Iterate default_start(const ProblemData& pd);

SolveReport solve(const ProblemData& pd, Iterate init, const SolverOptions& opts = {});
SolveReport solve(const ProblemData& pd, const SolverOptions& opts = {});

/// Flat key = value text.
void write_report(std::ostream& os, const SolveReport& r);
/// outer,g,mu,rho,nu,inner,stationarity
void write_history_csv(std::ostream& os, const SolveReport& r);

}  // namespace heatopt
