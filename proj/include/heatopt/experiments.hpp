#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heatopt/optimizer.hpp"
#include "heatopt/ssc.hpp"

namespace heatopt {

struct ExampleConfig {
    std::string key;
    double c_diff = 1.0;
    double alpha = 1.0;
    double delta0 = 0.5;
    std::optional<Bounds> bounds;
    std::vector<Rect> omega;  ///< distributed control region
    std::vector<Rect> forms;  ///< form functions of parameter controls
    ScalarField u0;
    ScalarField ud;
    ControlKind default_kind = ControlKind::PiecewiseConstant;
    bool analytic = false;  ///< closed-form reference available
};

std::vector<std::string> example_keys();
/// Throws ConfigError for unknown keys.
ExampleConfig example_config(const std::string& key);

/// Spatial level l uses n = 4 * 2^l squares per side.
int squares_per_side(int level);
/// Number of mesh nodes (n + 1)^2 at a level.
int node_count(int level);

ProblemData build_problem(const ExampleConfig& cfg, int M, int level, ControlKind kind);
ProblemData build_problem(const ExampleConfig& cfg, int M, int level);

/// Closed-form solution of example1 in transformed time.
namespace example1 {
double nu_bar();
double q_bar(double t, const Point& x);
double u_bar(double t, const Point& x);
double z_bar(double t, const Point& x);
}  // namespace example1

struct DiscretizationErrors {
    double err_nu = 0.0;
    double err_q = 0.0;
    double err_u = 0.0;  ///< terminal state
};

DiscretizationErrors analytic_errors(const ProblemData& pd, const SolveReport& rep);
/// Errors against a solution on a nested finer (time grid, mesh); coarse data is
/// embedded exactly into the fine spaces.
DiscretizationErrors reference_errors(const ProblemData& pd, const SolveReport& rep, const ProblemData& ref_pd,
                                      const SolveReport& ref);

/// Coarse control coefficients embedded into a nested finer control space.
Mat prolongate_control(const ControlSpace& coarse, const ControlFunction& q, const ControlSpace& fine,
                       const TimeGrid& fine_grid);

/// log(e_i / e_{i+1}) / log(ratio); NaN where undefined.
std::vector<double> compute_eoc(const std::vector<double>& errors, double ratio);

enum class StudyAxis { Time, Space };
StudyAxis parse_axis(const std::string& s);

struct StudyRow {
    int level = 0;
    int M = 0;
    int N = 0;
    double nu = 0.0;
    double err_nu = 0.0, err_q = 0.0, err_u = 0.0;
    double eoc_nu = 0.0, eoc_q = 0.0, eoc_u = 0.0;
    double seconds = 0.0;
    double g = 0.0;  ///< terminal constraint value of the solve
    bool converged = false;
};

struct StudyOptions {
    StudyAxis axis = StudyAxis::Space;
    std::vector<int> levels;  ///< spatial levels (space axis) or M values (time axis)
    int fixed = 0;            ///< M (space axis) or spatial level (time axis)
    ControlKind kind = ControlKind::PiecewiseConstant;
    int reference_depth = 2;  ///< extra refinements for fine-grid references
    SolverOptions solver;
};

std::vector<StudyRow> convergence_study(const ExampleConfig& cfg, const StudyOptions& opts);

/// level,M,N,err_nu,err_q,err_u,eoc_nu,eoc_q,eoc_u,seconds
void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows);
/// Log-log chart of the three error series with slope 1 and slope 2 guides.
void write_study_svg(std::ostream& os, const std::vector<StudyRow>& rows, StudyAxis axis);

struct SscCell {
    double alpha = 0.0;
    int M = 0;
    int level = 0;
    bool ok = false;
    std::string error;  ///< set when the solve or the check failed
    SolveReport solve;
    SscReport report;
};

struct SscSweepOptions {
    std::vector<double> alphas;
    std::vector<std::pair<int, int>> grids;  ///< (M, spatial level)
    std::optional<ControlKind> kind;         ///< example default when empty
    SolverOptions solver;
    SscOptions ssc;
};

/// One solve and one second order check per (grid, alpha); failures are recorded per cell.
std::vector<SscCell> ssc_sweep(const ExampleConfig& cfg, const SscSweepOptions& opts);

/// alpha,M,N,gamma,kappa_lower,minres_iters,residual,inactive_frac
void write_ssc_csv(std::ostream& os, const std::vector<SscCell>& cells);
/// Rows (M, N), column pairs (gamma, kappa_lower) per alpha, then inactive fractions.
void write_ssc_table(std::ostream& os, const std::vector<SscCell>& cells);

/// Optimal value of the problem with the time scaling frozen at nu.
double fixed_time_value(const ProblemData& pd, double nu, const ControlFunction& start, const SolverOptions& opts = {});

struct CurvatureCheck {
    double nu = 0.0;
    double step = 0.0;
    double values[3] = {0.0, 0.0, 0.0};  ///< V(nu - s), V(nu), V(nu + s)
    double second_difference = 0.0;
    double gamma = 0.0;
    double relative_error = 0.0;
};

/// Second difference of the fixed-time value function at a converged solution, against gamma.
CurvatureCheck value_curvature(const ProblemData& pd, const SolveReport& rep, double step = 1e-2,
                               const SolverOptions& opts = {});

/// Write through a temporary file and rename.
void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer);

}  // namespace heatopt
