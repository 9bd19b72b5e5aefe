#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "heatopt/fem.hpp"

namespace heatopt {

enum class ControlKind { Variational, PiecewiseConstant, PiecewiseLinear, Parameter };

std::string to_string(ControlKind kind);
ControlKind parse_control_kind(const std::string& s);

struct Bounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Discrete control space on one mesh level: coefficient layout, control
/// mass (the spatial part of the control inner product) and load map.
struct ControlSpace {
    ControlKind kind = ControlKind::PiecewiseConstant;
    std::shared_ptr<const ControlMap> map;
    std::shared_ptr<const Mesh2D> mesh;
    std::vector<Rect> forms;  ///< parameter controls only
    std::optional<Bounds> bounds;

    int size() const { return map->size(); }
};

/// Build the control space for a problem. Parameter problems (non-empty forms)
/// accept Parameter or Variational, which coincide there.
ControlSpace make_control_space(const FemOperators& ops, ControlKind kind, std::optional<Bounds> bounds,
                                const std::vector<Rect>& forms = {});

/// Piecewise constant in time; column m holds the coefficients on interval m.
/// For the Variational kind the columns are V_h coefficients of a field whose
/// pointwise cutoff to the bounds is the control.
struct ControlFunction {
    ControlKind kind = ControlKind::PiecewiseConstant;
    TimeGrid grid;
    Mat coeffs;
    std::optional<Bounds> bounds;

    int M() const { return grid.M(); }
};

ControlFunction zero_control(const ControlSpace& space, const TimeGrid& grid);

ControlFunction project_admissible(const ControlFunction& q);

/// Clamp a coefficient matrix to the bounds, in place.
void clamp_coefficients(Mat& coeffs, const std::optional<Bounds>& bounds);

using DistributedField = std::function<double(double t, const Point& x)>;
using ParameterField = std::function<Vec(double t)>;

/// Control discretization operator: L2 averages for P0 x P0, interval average
/// then nodal interpolation for P0 x P1.
ControlFunction apply_isigma(const ControlSpace& space, const TimeGrid& grid, const DistributedField& f);
/// Interval averages per component.
ControlFunction apply_isigma(const ControlSpace& space, const TimeGrid& grid, const ParameterField& f);

/// sum_m k_m q1_m^T Mc q2_m
double inner(const ControlFunction& q1, const ControlFunction& q2, const ControlSpace& space);
double inner(const Mat& a, const Mat& b, const TimeGrid& grid, const ControlSpace& space);
double norm(const ControlFunction& q, const ControlSpace& space);
double norm(const Mat& a, const TimeGrid& grid, const ControlSpace& space);

/// Interior load vectors, one column per interval: int_omega phi_i q_m.
Mat control_loads(const ControlSpace& space, const FemOperators& ops, const ControlFunction& q);

/// Pointwise value of the control on interval m at x.
double evaluate_control(const ControlSpace& space, const ControlFunction& q, int m, const Point& x);

/// One row per interval: t_start,t_end,c_0,...
void write_control_csv(std::ostream& os, const ControlFunction& q);

}  // namespace heatopt
