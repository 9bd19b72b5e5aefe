#include "heatopt/controldisc.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "heatopt/quadrature.hpp"

namespace heatopt {

namespace {

constexpr int kTimeGauss = 4;

void check_same_shape(const ControlFunction& a, const ControlFunction& b) {
    if (a.kind != b.kind) throw ConfigError("control kind mismatch");
    if (!(a.grid == b.grid) || a.coeffs.rows() != b.coeffs.rows())
        throw ConfigError("control shape mismatch");
}

double interval_average(double t0, double t1, const std::function<double(double)>& f) {
    const LineRule& r = gauss_legendre01(kTimeGauss);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(t0 + r.nodes[i] * (t1 - t0));
    return s;
}

}  // namespace

std::string to_string(ControlKind kind) {
    switch (kind) {
        case ControlKind::Variational: return "variational";
        case ControlKind::PiecewiseConstant: return "p0";
        case ControlKind::PiecewiseLinear: return "p1";
        case ControlKind::Parameter: return "parameter";
    }
    return "?";
}

ControlKind parse_control_kind(const std::string& s) {
    if (s == "variational") return ControlKind::Variational;
    if (s == "p0" || s == "cellwise-constant") return ControlKind::PiecewiseConstant;
    if (s == "p1" || s == "cellwise-linear") return ControlKind::PiecewiseLinear;
    if (s == "parameter") return ControlKind::Parameter;
    throw ConfigError("unknown control kind '" + s + "' (variational, p0, p1, parameter)");
}

ControlSpace make_control_space(const FemOperators& ops, ControlKind kind, std::optional<Bounds> bounds,
                                const std::vector<Rect>& forms) {
    if (bounds && !(bounds->lower < bounds->upper)) throw ConfigError("control bounds need lower < upper");
    ControlSpace space;
    space.mesh = ops.mesh;
    space.bounds = bounds;
    if (!forms.empty()) {
        if (kind != ControlKind::Parameter && kind != ControlKind::Variational)
            throw ConfigError("parameter problems support only parameter/variational controls");
        space.kind = ControlKind::Parameter;
        space.forms = forms;
        space.map = std::make_shared<ControlMap>(make_parameter_control_map(ops, forms));
        return space;
    }
    space.kind = kind;
    switch (kind) {
        case ControlKind::Variational:
            space.map = std::make_shared<ControlMap>(make_nodal_control_map(ops, false));
            break;
        case ControlKind::PiecewiseConstant:
            space.map = std::make_shared<ControlMap>(make_cellwise_control_map(ops));
            break;
        case ControlKind::PiecewiseLinear:
            space.map = std::make_shared<ControlMap>(make_nodal_control_map(ops, true));
            break;
        case ControlKind::Parameter: throw ConfigError("parameter control needs form functions");
    }
    return space;
}

ControlFunction zero_control(const ControlSpace& space, const TimeGrid& grid) {
    ControlFunction q;
    q.kind = space.kind;
    q.grid = grid;
    q.coeffs = Mat::Zero(space.size(), grid.M());
    q.bounds = space.bounds;
    if (q.kind != ControlKind::Variational) clamp_coefficients(q.coeffs, q.bounds);
    return q;
}

void clamp_coefficients(Mat& coeffs, const std::optional<Bounds>& bounds) {
    if (!bounds) return;
    coeffs = coeffs.cwiseMax(bounds->lower).cwiseMin(bounds->upper);
}

ControlFunction project_admissible(const ControlFunction& q) {
    ControlFunction out = q;
    // The variational kind keeps its field; the cutoff is applied pointwise.
    if (q.kind != ControlKind::Variational) clamp_coefficients(out.coeffs, q.bounds);
    return out;
}

ControlFunction apply_isigma(const ControlSpace& space, const TimeGrid& grid, const DistributedField& f) {
    if (space.kind == ControlKind::Variational || space.kind == ControlKind::Parameter)
        throw ConfigError("apply_isigma: distributed field needs a p0 or p1 target");
    ControlFunction q = zero_control(space, grid);
    q.coeffs.setZero();
    const Mesh2D& mesh = *space.mesh;
    const auto& ents = space.map->entities;
    for (int m = 0; m < grid.M(); ++m) {
        const double t0 = grid.t[m], t1 = grid.t[m + 1];
        for (int c = 0; c < space.size(); ++c) {
            if (space.kind == ControlKind::PiecewiseConstant) {
                const int t = ents[c];
                const TriangleRule& rule = triangle_rule(4);
                const auto& tri = mesh.triangles[t];
                double s = 0.0;
                for (std::size_t k = 0; k < rule.weights.size(); ++k) {
                    Point p;
                    for (int i = 0; i < 3; ++i) {
                        p.x += rule.bary[k][i] * mesh.nodes[tri[i]].x;
                        p.y += rule.bary[k][i] * mesh.nodes[tri[i]].y;
                    }
                    s += rule.weights[k] * interval_average(t0, t1, [&](double t) { return f(t, p); });
                }
                q.coeffs(c, m) = s;
            } else {
                const Point p = mesh.nodes[ents[c]];
                q.coeffs(c, m) = interval_average(t0, t1, [&](double t) { return f(t, p); });
            }
        }
    }
    return q;
}

ControlFunction apply_isigma(const ControlSpace& space, const TimeGrid& grid, const ParameterField& f) {
    if (space.kind != ControlKind::Parameter) throw ConfigError("apply_isigma: parameter field needs parameter target");
    ControlFunction q = zero_control(space, grid);
    const LineRule& r = gauss_legendre01(kTimeGauss);
    for (int m = 0; m < grid.M(); ++m) {
        Vec acc = Vec::Zero(space.size());
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            const Vec v = f(grid.t[m] + r.nodes[i] * grid.k[m]);
            if (v.size() != space.size()) throw ConfigError("apply_isigma: parameter field has wrong length");
            acc += r.weights[i] * v;
        }
        q.coeffs.col(m) = acc;
    }
    return q;
}

double inner(const Mat& a, const Mat& b, const TimeGrid& grid, const ControlSpace& space) {
    if (a.rows() != space.size() || b.rows() != space.size() || a.cols() != grid.M() || b.cols() != grid.M())
        throw ConfigError("control inner product: shape mismatch");
    const Mat mb = space.map->mass_apply(b);
    double s = 0.0;
    for (int m = 0; m < grid.M(); ++m) s += grid.k[m] * a.col(m).dot(mb.col(m));
    return s;
}

double inner(const ControlFunction& q1, const ControlFunction& q2, const ControlSpace& space) {
    check_same_shape(q1, q2);
    return inner(q1.coeffs, q2.coeffs, q1.grid, space);
}

double norm(const Mat& a, const TimeGrid& grid, const ControlSpace& space) {
    return std::sqrt(std::max(0.0, inner(a, a, grid, space)));
}

double norm(const ControlFunction& q, const ControlSpace& space) { return norm(q.coeffs, q.grid, space); }

Mat control_loads(const ControlSpace& space, const FemOperators& ops, const ControlFunction& q) {
    if (q.coeffs.rows() != space.size()) throw ConfigError("control has wrong number of coefficients");
    if (q.kind != ControlKind::Variational || !q.bounds) return space.map->E * q.coeffs;
    // Cutoff of a V_h field: integrate against the hat functions with the order-4 rule.
    const Mesh2D& mesh = *space.mesh;
    const TriangleRule& rule = triangle_rule(4);
    std::vector<int> col(mesh.num_nodes(), -1);
    for (int c = 0; c < space.size(); ++c) col[space.map->entities[c]] = c;
    Mat loads = Mat::Zero(ops.num_dofs(), q.M());
    for (int m = 0; m < q.M(); ++m) {
        for (int t : mesh.omega_triangles) {
            const auto& tri = mesh.triangles[t];
            const double area = mesh.triangle_area(t);
            for (std::size_t k = 0; k < rule.weights.size(); ++k) {
                double v = 0.0;
                for (int i = 0; i < 3; ++i)
                    if (col[tri[i]] >= 0) v += rule.bary[k][i] * q.coeffs(col[tri[i]], m);
                v = std::clamp(v, q.bounds->lower, q.bounds->upper);
                for (int i = 0; i < 3; ++i) {
                    const int r = ops.interior_index[tri[i]];
                    if (r >= 0) loads(r, m) += rule.weights[k] * area * v * rule.bary[k][i];
                }
            }
        }
    }
    return loads;
}

double evaluate_control(const ControlSpace& space, const ControlFunction& q, int m, const Point& x) {
    const Mesh2D& mesh = *space.mesh;
    const auto& ents = space.map->entities;
    if (space.kind == ControlKind::Parameter) {
        double v = 0.0;
        for (std::size_t n = 0; n < space.forms.size(); ++n)
            if (space.forms[n].contains(x)) v += q.coeffs(static_cast<Eigen::Index>(n), m);
        return v;
    }
    const auto [t, l] = locate(mesh, x);
    if (!std::binary_search(mesh.omega_triangles.begin(), mesh.omega_triangles.end(), t)) return 0.0;
    if (space.kind == ControlKind::PiecewiseConstant) {
        const auto it = std::lower_bound(ents.begin(), ents.end(), t);
        return q.coeffs(it - ents.begin(), m);
    }
    double v = 0.0;
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
        const auto it = std::lower_bound(ents.begin(), ents.end(), tri[i]);
        if (it != ents.end() && *it == tri[i]) v += l[i] * q.coeffs(it - ents.begin(), m);
    }
    if (space.kind == ControlKind::Variational && q.bounds) v = std::clamp(v, q.bounds->lower, q.bounds->upper);
    return v;
}

void write_control_csv(std::ostream& os, const ControlFunction& q) {
    os << "t_start,t_end";
    for (Eigen::Index c = 0; c < q.coeffs.rows(); ++c) os << ",c" << c;
    os << "\n" << std::setprecision(17);
    for (int m = 0; m < q.M(); ++m) {
        os << q.grid.t[m] << "," << q.grid.t[m + 1];
        for (Eigen::Index c = 0; c < q.coeffs.rows(); ++c) os << "," << q.coeffs(c, m);
        os << "\n";
    }
}

}  // namespace heatopt
