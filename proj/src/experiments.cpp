#include "heatopt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "heatopt/quadrature.hpp"

namespace heatopt {

std::vector<std::string> example_keys() { return {"example1", "example2", "example3"}; }

ExampleConfig example_config(const std::string& key) {
    ExampleConfig c;
    c.key = key;
    if (key == "example1") {
        c.c_diff = 1.0 / (2.0 * M_PI * M_PI);
        c.alpha = 1.0;
        c.delta0 = 0.5;
        c.omega = {Rect{0, 1, 0, 1}};
        c.u0 = [](const Point& p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); };
        c.ud = [](const Point& p) { return -2.0 * std::sin(M_PI * p.x) * std::sin(M_PI * p.y); };
        c.default_kind = ControlKind::Variational;
        c.analytic = true;
    } else if (key == "example2") {
        c.c_diff = 0.03;
        c.alpha = 1e-2;
        c.delta0 = 0.1;
        c.bounds = Bounds{-1.5, 0.0};
        c.forms = {Rect{0, 0.5, 0, 1}, Rect{0.5, 1, 0, 0.5}};
        c.u0 = [](const Point& p) { return 4.0 * std::sin(M_PI * p.x * p.x) * std::sin(M_PI * p.y * p.y * p.y); };
        c.ud = [](const Point&) { return 0.0; };
        c.default_kind = ControlKind::Parameter;
    } else if (key == "example3") {
        c.c_diff = 0.03;
        c.alpha = 1e-2;
        c.delta0 = 0.1;
        c.bounds = Bounds{-5.0, 0.0};
        c.omega = {Rect{0, 0.75, 0, 0.75}};
        c.u0 = [](const Point& p) { return 4.0 * std::sin(M_PI * p.x * p.x) * std::pow(std::sin(M_PI * p.y), 3); };
        c.ud = [](const Point& p) { return -2.0 * std::min({p.x, 1.0 - p.x, p.y, 1.0 - p.y}); };
        c.default_kind = ControlKind::PiecewiseConstant;
    } else {
        throw ConfigError("unknown example '" + key + "'");
    }
    return c;
}

int squares_per_side(int level) {
    if (level < 0 || level > 10) throw ConfigError("spatial level must lie in [0, 10]");
    return 4 << level;
}

int node_count(int level) {
    const int n = squares_per_side(level);
    return (n + 1) * (n + 1);
}

ProblemData build_problem(const ExampleConfig& cfg, int M, int level, ControlKind kind) {
    const int n = squares_per_side(level);
    const bool param = !cfg.forms.empty();
    auto mesh = std::make_shared<const Mesh2D>(build_structured_mesh(n, param ? cfg.forms : cfg.omega));
    ProblemData pd;
    pd.alpha = cfg.alpha;
    pd.delta0 = cfg.delta0;
    pd.ops = std::make_shared<const FemOperators>(
        assemble(mesh, cfg.c_diff, param ? ControlKindFem::Parameter : ControlKindFem::Distributed, cfg.forms));
    pd.space = make_control_space(*pd.ops, kind, cfg.bounds, cfg.forms);
    pd.grid = build_time_grid(M);
    pd.u0 = l2_project(*pd.ops, cfg.u0);
    pd.ud = l2_project(*pd.ops, cfg.ud);
    pd.validate();
    return pd;
}

ProblemData build_problem(const ExampleConfig& cfg, int M, int level) {
    return build_problem(cfg, M, level, cfg.default_kind);
}

namespace example1 {

double nu_bar() { return std::log(2.0); }

namespace {
double u0(const Point& x) { return std::sin(M_PI * x.x) * std::sin(M_PI * x.y); }
}  // namespace

double u_bar(double t, const Point& x) {
    const double nu = nu_bar();
    return 2.0 * (std::exp(-nu * t) - std::exp(nu * (t - 1.0))) * u0(x);
}

double z_bar(double t, const Point& x) { return 4.0 * std::exp(nu_bar() * (t - 1.0)) * u0(x); }

double q_bar(double t, const Point& x) { return -z_bar(t, x); }

}  // namespace example1

namespace {

/// int_omega psi_c f for every control basis function.
Vec control_moments(const ControlSpace& space, const ScalarField& f) {
    const Mesh2D& mesh = *space.mesh;
    const auto& ents = space.map->entities;
    const TriangleRule& rule = triangle_rule(4);
    Vec b = Vec::Zero(space.size());
    for (int t : mesh.omega_triangles) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        for (std::size_t qp = 0; qp < rule.weights.size(); ++qp) {
            const auto& l = rule.bary[qp];
            Point x{0.0, 0.0};
            for (int i = 0; i < 3; ++i) {
                x.x += l[i] * mesh.nodes[tri[i]].x;
                x.y += l[i] * mesh.nodes[tri[i]].y;
            }
            const double fw = f(x) * rule.weights[qp] * area;
            if (space.map->layout == ControlMap::Layout::OmegaCells) {
                b[std::lower_bound(ents.begin(), ents.end(), t) - ents.begin()] += fw;
            } else {
                for (int i = 0; i < 3; ++i) {
                    const auto it = std::lower_bound(ents.begin(), ents.end(), tri[i]);
                    if (it != ents.end() && *it == tri[i]) b[it - ents.begin()] += l[i] * fw;
                }
            }
        }
    }
    return b;
}

Vec terminal_state(const ProblemData& pd, const SolveReport& rep) {
    Iterate it(rep.nu, rep.q);
    return it.state(pd).terminal();
}

std::array<double, 3> barycentric(const Mesh2D& mesh, int t, const Point& p) {
    const auto& tri = mesh.triangles[t];
    const Point& a = mesh.nodes[tri[0]];
    const Point& b = mesh.nodes[tri[1]];
    const Point& c = mesh.nodes[tri[2]];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    const double l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
    const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
    return {1.0 - l1 - l2, l1, l2};
}

}  // namespace

DiscretizationErrors analytic_errors(const ProblemData& pd, const SolveReport& rep) {
    DiscretizationErrors e;
    const double nu = example1::nu_bar();
    e.err_nu = std::abs(rep.nu - nu);
    // q_bar(t, x) = a(t) phi(x) with a(t) = -4 exp(nu (t - 1)), |phi|^2 = 1/4.
    const ScalarField phi = [](const Point& x) { return std::sin(M_PI * x.x) * std::sin(M_PI * x.y); };
    const Vec b = control_moments(pd.space, phi);
    const Mat mq = pd.space.map->mass_apply(rep.q.coeffs);
    double e2 = 0.0;
    for (int m = 0; m < pd.grid.M(); ++m) {
        const double t0 = pd.grid.t[m], t1 = pd.grid.t[m + 1];
        const double ia = -4.0 * std::exp(-nu) * (std::exp(nu * t1) - std::exp(nu * t0)) / nu;
        const double ia2 = 16.0 * std::exp(-2.0 * nu) * (std::exp(2.0 * nu * t1) - std::exp(2.0 * nu * t0)) / (2.0 * nu);
        e2 += pd.grid.k[m] * rep.q.coeffs.col(m).dot(mq.col(m)) - 2.0 * ia * rep.q.coeffs.col(m).dot(b) + 0.25 * ia2;
    }
    e.err_q = std::sqrt(std::max(e2, 0.0));
    const Vec uT = terminal_state(pd, rep);
    e.err_u = l2_error(*pd.ops, uT, [](const Point& x) { return example1::u_bar(1.0, x); });
    return e;
}

Mat prolongate_control(const ControlSpace& coarse, const ControlFunction& q, const ControlSpace& fine,
                       const TimeGrid& fine_grid) {
    if (coarse.kind != fine.kind) throw ConfigError("control kinds differ between levels");
    const int r = time_refinement_ratio(q.grid, fine_grid);
    const int nf = fine.size();
    Mat spatial(nf, q.M());
    const Mesh2D& cm = *coarse.mesh;
    const Mesh2D& fm = *fine.mesh;
    const auto& cents = coarse.map->entities;
    const auto& fents = fine.map->entities;
    if (coarse.map->layout == ControlMap::Layout::Parameter) {
        if (nf != coarse.size()) throw ConfigError("parameter spaces differ between levels");
        spatial = q.coeffs;
    } else if (coarse.map->layout == ControlMap::Layout::OmegaCells) {
        for (int c = 0; c < nf; ++c) {
            const int t = locate(cm, fm.centroid(fents[c])).first;
            const auto it = std::lower_bound(cents.begin(), cents.end(), t);
            if (it == cents.end() || *it != t) throw ConfigError("meshes are not nested");
            spatial.row(c) = q.coeffs.row(it - cents.begin());
        }
    } else {
        // A fine omega triangle at each fine node selects the coarse triangle to interpolate from.
        std::vector<int> owner(fm.num_nodes(), -1);
        for (int t : fm.omega_triangles)
            for (int v : fm.triangles[t])
                if (owner[v] < 0) owner[v] = t;
        for (int c = 0; c < nf; ++c) {
            const Point p = fm.nodes[fents[c]];
            const Point g = fm.centroid(owner[fents[c]]);
            const Point x{p.x + 1e-3 * (g.x - p.x), p.y + 1e-3 * (g.y - p.y)};
            const int t = locate(cm, x).first;
            const auto l = barycentric(cm, t, p);
            spatial.row(c).setZero();
            for (int i = 0; i < 3; ++i) {
                const int v = cm.triangles[t][i];
                const auto it = std::lower_bound(cents.begin(), cents.end(), v);
                if (it != cents.end() && *it == v) spatial.row(c) += l[i] * q.coeffs.row(it - cents.begin());
            }
        }
    }
    Mat out(nf, fine_grid.M());
    for (int m = 0; m < fine_grid.M(); ++m) out.col(m) = spatial.col(m / r);
    return out;
}

DiscretizationErrors reference_errors(const ProblemData& pd, const SolveReport& rep, const ProblemData& ref_pd,
                                      const SolveReport& ref) {
    DiscretizationErrors e;
    e.err_nu = std::abs(rep.nu - ref.nu);
    const Mat qc = prolongate_control(pd.space, rep.q, ref_pd.space, ref_pd.grid);
    e.err_q = norm(Mat(qc - ref.q.coeffs), ref_pd.grid, ref_pd.space);
    const Vec uc = prolongate(*pd.ops, *ref_pd.ops, terminal_state(pd, rep));
    const Vec d = uc - terminal_state(ref_pd, ref);
    e.err_u = std::sqrt(d.dot(ref_pd.ops->M * d));
    return e;
}

std::vector<double> compute_eoc(const std::vector<double>& errors, double ratio) {
    if (!(ratio > 1.0)) throw ConfigError("refinement ratio must exceed 1");
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        if (errors[i] > 0.0 && errors[i + 1] > 0.0)
            out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(ratio));
        else
            out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

StudyAxis parse_axis(const std::string& s) {
    if (s == "time") return StudyAxis::Time;
    if (s == "space") return StudyAxis::Space;
    throw ConfigError("unknown study axis '" + s + "' (expected time or space)");
}

std::vector<StudyRow> convergence_study(const ExampleConfig& cfg, const StudyOptions& opts) {
    if (opts.levels.size() < 2) throw ConfigError("a study needs at least two levels");
    for (std::size_t i = 0; i + 1 < opts.levels.size(); ++i) {
        if (opts.axis == StudyAxis::Space && opts.levels[i + 1] != opts.levels[i] + 1)
            throw ConfigError("spatial levels must be consecutive");
        if (opts.axis == StudyAxis::Time &&
            (opts.levels[i + 1] <= opts.levels[i] || opts.levels[i + 1] % opts.levels[i] != 0))
            throw ConfigError("time grids must be nested");
    }
    auto shape = [&](int v) { return opts.axis == StudyAxis::Space ? std::pair{opts.fixed, v} : std::pair{v, opts.fixed}; };

    std::optional<ProblemData> ref_pd;
    SolveReport ref;
    if (!cfg.analytic) {
        int M = 0, level = 0;
        if (opts.axis == StudyAxis::Space) {
            M = opts.fixed;
            level = opts.levels.back() + opts.reference_depth;
        } else {
            M = opts.levels.back() << opts.reference_depth;
            level = opts.fixed;
        }
        ref_pd = build_problem(cfg, M, level, opts.kind);
        SolverOptions so = opts.solver;
        so.tol_s /= 100.0;
        so.tol_g /= 100.0;
        ref = solve(*ref_pd, so);
    }

    std::vector<StudyRow> rows;
    for (int v : opts.levels) {
        const auto [M, level] = shape(v);
        const auto t0 = std::chrono::steady_clock::now();
        const ProblemData pd = build_problem(cfg, M, level, opts.kind);
        const SolveReport rep = solve(pd, opts.solver);
        StudyRow row;
        row.level = level;
        row.M = M;
        row.N = node_count(level);
        row.nu = rep.nu;
        row.converged = rep.converged;
        row.g = rep.g;
        const DiscretizationErrors e = cfg.analytic ? analytic_errors(pd, rep) : reference_errors(pd, rep, *ref_pd, ref);
        row.err_nu = e.err_nu;
        row.err_q = e.err_q;
        row.err_u = e.err_u;
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(row);
    }
    auto fill = [&](auto member_err, auto member_eoc) {
        std::vector<double> errs;
        for (const auto& r : rows) errs.push_back(r.*member_err);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == 0) {
                rows[i].*member_eoc = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            const double ratio = opts.axis == StudyAxis::Space ? 2.0 : double(rows[i].M) / rows[i - 1].M;
            rows[i].*member_eoc = compute_eoc({errs[i - 1], errs[i]}, ratio)[0];
        }
    };
    fill(&StudyRow::err_nu, &StudyRow::eoc_nu);
    fill(&StudyRow::err_q, &StudyRow::eoc_q);
    fill(&StudyRow::err_u, &StudyRow::eoc_u);
    return rows;
}

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows) {
    os << "level,M,N,err_nu,err_q,err_u,eoc_nu,eoc_q,eoc_u,seconds\n";
    auto num = [&](double v) {
        if (std::isnan(v)) return std::string();
        std::ostringstream s;
        s << std::setprecision(10) << v;
        return s.str();
    };
    for (const auto& r : rows)
        os << r.level << "," << r.M << "," << r.N << "," << num(r.err_nu) << "," << num(r.err_q) << ","
           << num(r.err_u) << "," << num(r.eoc_nu) << "," << num(r.eoc_q) << "," << num(r.eoc_u) << ","
           << num(r.seconds) << "\n";
}

void write_study_svg(std::ostream& os, const std::vector<StudyRow>& rows, StudyAxis axis) {
    const double W = 480, H = 360, pad = 50;
    std::vector<double> xs;
    for (const auto& r : rows)
        xs.push_back(axis == StudyAxis::Space ? 1.0 / squares_per_side(r.level) : 1.0 / r.M);
    double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
    for (const auto& r : rows)
        for (double e : {r.err_nu, r.err_q, r.err_u})
            if (e > 0.0) {
                ymin = std::min(ymin, e);
                ymax = std::max(ymax, e);
            }
    if (!(ymax > 0.0) || xs.empty()) ymin = 1e-3, ymax = 1.0;
    const double xmin = *std::min_element(xs.begin(), xs.end()), xmax = *std::max_element(xs.begin(), xs.end());
    const double lx0 = std::log10(xmin) - 0.1, lx1 = std::log10(xmax) + 0.1;
    const double ly0 = std::log10(ymin) - 0.3, ly1 = std::log10(ymax) + 0.3;
    auto px = [&](double x) { return pad + (std::log10(x) - lx0) / (lx1 - lx0) * (W - 2 * pad); };
    auto py = [&](double y) { return H - pad - (std::log10(y) - ly0) / (ly1 - ly0) * (H - 2 * pad); };
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
       << (axis == StudyAxis::Space ? "h" : "k") << "</text>\n";
    const char* names[3] = {"err_nu", "err_q", "err_u"};
    const char* colors[3] = {"#1f77b4", "#d62728", "#2ca02c"};
    for (int s = 0; s < 3; ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << colors[s] << "\" points=\"";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double e = s == 0 ? rows[i].err_nu : s == 1 ? rows[i].err_q : rows[i].err_u;
            if (e > 0.0) os << px(xs[i]) << "," << py(e) << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << pad + 8 << "\" y=\"" << pad + 16 + 16 * s << "\" fill=\"" << colors[s] << "\">" << names[s]
           << "</text>\n";
    }
    // Guides through the largest error at the coarsest point.
    for (int slope : {1, 2}) {
        const double y0 = ymax, x0 = xmax;
        const double y1 = y0 * std::pow(xmin / x0, slope);
        os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(xmin) << "\" y2=\"" << py(y1)
           << "\" stroke=\"gray\" stroke-dasharray=\"4,3\"/>\n";
        os << "<text x=\"" << px(xmin) << "\" y=\"" << py(y1) - 4 << "\" fill=\"gray\">slope " << slope << "</text>\n";
    }
    os << "</svg>\n";
}

std::vector<SscCell> ssc_sweep(const ExampleConfig& cfg, const SscSweepOptions& opts) {
    if (opts.alphas.empty() || opts.grids.empty()) throw ConfigError("an ssc sweep needs alphas and grids");
    for (double a : opts.alphas)
        if (!(a > 0.0)) throw ConfigError("alpha must be positive");
    std::vector<SscCell> cells;
    for (const auto& [M, level] : opts.grids) {
        for (double a : opts.alphas) {
            SscCell c;
            c.alpha = a;
            c.M = M;
            c.level = level;
            try {
                ExampleConfig ca = cfg;
                ca.alpha = a;
                const ProblemData pd = build_problem(ca, M, level, opts.kind.value_or(cfg.default_kind));
                c.solve = solve(pd, opts.solver);
                if (!c.solve.converged) {
                    c.error = c.solve.message;
                } else {
                    c.report = ssc_check(pd, c.solve, opts.ssc);
                    c.ok = true;
                    if (!c.report.minres_converged) c.error = "MINRES did not reach the tolerance";
                }
            } catch (const std::exception& ex) {
                c.error = ex.what();
            }
            cells.push_back(std::move(c));
        }
    }
    return cells;
}

namespace {

std::string fmt(double v, int prec = 10) {
    if (std::isnan(v)) return std::string();
    std::ostringstream s;
    s << std::setprecision(prec) << v;
    return s.str();
}

std::string fmt_sci(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream s;
    s << std::scientific << std::setprecision(3) << v;
    return s.str();
}

}  // namespace

void write_ssc_csv(std::ostream& os, const std::vector<SscCell>& cells) {
    os << "alpha,M,N,gamma,kappa_lower,minres_iters,residual,inactive_frac\n";
    for (const auto& c : cells) {
        os << fmt(c.alpha) << "," << c.M << "," << node_count(c.level) << ",";
        if (c.ok)
            os << fmt(c.report.gamma) << "," << fmt(c.report.kappa_lower) << "," << c.report.minres_iterations << ","
               << fmt(c.report.residual) << "," << fmt(c.report.inactive_fraction);
        else
            os << ",,,,";
        os << "\n";
    }
}

void write_ssc_table(std::ostream& os, const std::vector<SscCell>& cells) {
    std::vector<double> alphas;
    std::vector<std::pair<int, int>> grids;
    for (const auto& c : cells) {
        if (std::find(alphas.begin(), alphas.end(), c.alpha) == alphas.end()) alphas.push_back(c.alpha);
        if (std::find(grids.begin(), grids.end(), std::pair{c.M, c.level}) == grids.end())
            grids.emplace_back(c.M, c.level);
    }
    auto find = [&](int M, int level, double a) -> const SscCell* {
        for (const auto& c : cells)
            if (c.M == M && c.level == level && c.alpha == a) return &c;
        return nullptr;
    };
    const int w = 11;
    os << std::setw(6) << "M" << std::setw(8) << "N";
    for (double a : alphas) os << std::setw(w) << ("g(" + fmt(a, 3) + ")") << std::setw(w) << ("k(" + fmt(a, 3) + ")");
    os << "\n";
    for (const auto& [M, level] : grids) {
        os << std::setw(6) << M << std::setw(8) << node_count(level);
        for (double a : alphas) {
            const SscCell* c = find(M, level, a);
            if (c && c->ok)
                os << std::setw(w) << fmt_sci(c->report.gamma) << std::setw(w) << fmt_sci(c->report.kappa_lower);
            else
                os << std::setw(w) << "failed" << std::setw(w) << "-";
        }
        os << "\n";
    }
    os << std::setw(14) << "inactive";
    for (double a : alphas) os << std::setw(2 * w) << ("alpha=" + fmt(a, 3));
    os << "\n";
    for (const auto& [M, level] : grids) {
        os << std::setw(6) << M << std::setw(8) << node_count(level);
        for (double a : alphas) {
            const SscCell* c = find(M, level, a);
            std::ostringstream v;
            if (c && c->ok)
                v << std::fixed << std::setprecision(1) << 100.0 * c->report.inactive_fraction << "%";
            else
                v << "-";
            os << std::setw(2 * w) << v.str();
        }
        os << "\n";
    }
}

double fixed_time_value(const ProblemData& pd, double nu, const ControlFunction& start, const SolverOptions& opts) {
    SolverOptions o = opts;
    o.fix_nu = true;
    const SolveReport r = solve(pd, Iterate(nu, start), o);
    if (!r.converged) throw StagnationError("fixed time problem did not converge: " + r.message);
    return eval_j(pd, nu, r.q);
}

CurvatureCheck value_curvature(const ProblemData& pd, const SolveReport& rep, double step, const SolverOptions& opts) {
    if (!rep.converged) throw ConfigError("curvature check needs a converged solution");
    if (!(step > 0.0) || !(step < rep.nu)) throw ConfigError("curvature step must lie in (0, nu)");
    CurvatureCheck c;
    c.nu = rep.nu;
    c.step = step;
    for (int i = 0; i < 3; ++i) c.values[i] = fixed_time_value(pd, rep.nu + (i - 1) * step, rep.q, opts);
    c.second_difference = (c.values[0] - 2.0 * c.values[1] + c.values[2]) / (step * step);
    c.gamma = ssc_check(pd, rep).gamma;
    c.relative_error = std::abs(c.second_difference - c.gamma) / std::abs(c.gamma);
    return c;
}

void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    const std::filesystem::path tmp = p.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string());
        writer(os);
        os.flush();
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

}  // namespace heatopt
