#include "heatopt/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "heatopt/experiments.hpp"
#include "heatopt/quadrature.hpp"
#include "heatopt/ssc.hpp"

namespace heatopt {

namespace {

struct Case {
    std::string label;
    ProblemData pd;
};

Mat random_mat(std::mt19937& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> nd;
    Mat a(r, c);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    return a;
}

ControlFunction with(const ControlFunction& q, const Mat& c) {
    ControlFunction r = q;
    r.coeffs = c;
    return r;
}

double lagrangian(const ProblemData& pd, double nu, const ControlFunction& q, double mu) {
    return eval_j(pd, nu, q) + mu * eval_g(pd, nu, q);
}

CheckResult upper(std::string name, double value, double threshold) {
    return {std::move(name), value, threshold, true, value <= threshold};
}

CheckResult lower(std::string name, double value, double threshold) {
    return {std::move(name), value, threshold, false, value >= threshold};
}

/// Relative FD error at 1e-4 and error ratio between eps = 1e-3 and 1e-4.
/// A ratio is only meaningful above rounding level, so tiny errors count as decayed.
std::pair<double, double> fd_errors(const std::function<double(double)>& f, double exact) {
    double err[2];
    const double eps[2] = {1e-3, 1e-4};
    for (int i = 0; i < 2; ++i) err[i] = std::abs((f(eps[i]) - f(-eps[i])) / (2 * eps[i]) - exact);
    const double scale = 1.0 + std::abs(exact);
    const double ratio = err[0] <= 1e-11 * scale ? 100.0 : err[0] / std::max(err[1], 1e-300);
    return {err[1] / scale, ratio};
}

std::vector<Case> cases(const SelfCheckOptions& o) {
    std::vector<Case> cs;
    cs.push_back({"example1/variational", build_problem(example_config("example1"), o.M, o.level)});
    cs.push_back({"example2/parameter", build_problem(example_config("example2"), o.M, o.level)});
    const ExampleConfig e3 = example_config("example3");
    cs.push_back({"example3/p0", build_problem(e3, o.M, o.level, ControlKind::PiecewiseConstant)});
    cs.push_back({"example3/p1", build_problem(e3, o.M, o.level, ControlKind::PiecewiseLinear)});
    return cs;
}

void derivative_checks(const Case& c, std::mt19937& rng, std::vector<CheckResult>& out) {
    const ProblemData& pd = c.pd;
    const ControlFunction q = with(zero_control(pd.space, pd.grid), 0.5 * random_mat(rng, pd.space.size(), pd.grid.M()));
    const double nu = 1.1, mu = 3.0;
    Iterate it(nu, q);
    const Direction g = grad_L(pd, it, mu);

    auto [en, rn] = fd_errors([&](double e) { return lagrangian(pd, nu + e, q, mu); }, g.dnu);
    out.push_back(upper("fd gradient nu " + c.label, en, 1e-6));
    out.push_back(lower("fd gradient nu decay " + c.label, rn, 50.0));
    const Mat dq = random_mat(rng, pd.space.size(), pd.grid.M());
    auto [eq, rq] = fd_errors([&](double e) { return lagrangian(pd, nu, with(q, q.coeffs + e * dq), mu); },
                              inner(g.dq, dq, pd.grid, pd.space));
    out.push_back(upper("fd gradient q " + c.label, eq, 1e-6));
    out.push_back(lower("fd gradient q decay " + c.label, rq, 50.0));

    const Direction d{0.7, random_mat(rng, pd.space.size(), pd.grid.M())};
    const Direction e{-0.4, random_mat(rng, pd.space.size(), pd.grid.M())};
    const double a = product_inner(pd, hess_L_apply(pd, it, mu, d), e);
    const double b = product_inner(pd, d, hess_L_apply(pd, it, mu, e));
    out.push_back(upper("hessian symmetry " + c.label, std::abs(a - b) / std::abs(a), 1e-10));

    const MixedDerivatives md = hess_L_mixed_representer(pd, it, mu);
    const double eps = 1e-4;
    Iterate ip(nu + eps, q), im(nu - eps, q);
    const Mat fd = (grad_L(pd, ip, mu).dq - grad_L(pd, im, mu).dq) / (2 * eps);
    const double x = inner(md.r_mix, dq, pd.grid, pd.space), y = inner(fd, dq, pd.grid, pd.space);
    out.push_back(upper("mixed representer fd " + c.label, std::abs(x - y) / std::abs(x), 1e-5));

    if (pd.space.bounds) {
        ControlFunction qa = q;
        clamp_coefficients(qa.coeffs, pd.space.bounds);
        Iterate ia(nu, qa);
        KktOperator K(pd, ia, mu, build_free_set(pd, ia, mu));
        std::normal_distribution<double> nd;
        Vec u(K.rows()), v(K.rows());
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = nd(rng), v[i] = nd(rng);
        const double uv = v.dot(K.apply(u)), vu = u.dot(K.apply(v));
        out.push_back(upper("kkt symmetry " + c.label, std::abs(uv - vu) / (std::abs(uv) + u.norm() * v.norm()), 1e-10));
    }

    double dual = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const Vec qc = random_mat(rng, pd.ops->control_map.size(), 1).col(0);
        const Vec z = random_mat(rng, pd.ops->num_dofs(), 1).col(0);
        const double l = apply_B(*pd.ops, qc).dot(z);
        const double r = qc.dot(pd.ops->control_map.Mc * apply_Bstar(*pd.ops, z));
        dual = std::max(dual, std::abs(l - r) / (qc.norm() * z.norm()));
    }
    out.push_back(upper("B B* duality " + c.label, dual, 1e-12));
}

/// <f - P f, p> for the P0 x P0 projection and a polynomial integrated exactly.
double projection_orthogonality(const ProblemData& pd, std::mt19937& rng) {
    auto f = [](double t, const Point& x) { return t * x.x + x.y * x.y - 0.3 * t * t; };
    const ControlFunction pf = apply_isigma(pd.space, pd.grid, f);
    const Mesh2D& mesh = *pd.space.mesh;
    const TriangleRule& tr = triangle_rule(2);
    const LineRule& lr = gauss_legendre01(2);
    const Mat p = random_mat(rng, pd.space.size(), pd.grid.M());
    double lhs = 0.0, scale = 0.0;
    for (int m = 0; m < pd.grid.M(); ++m) {
        const double t0 = pd.grid.t[m], k = pd.grid.k[m];
        for (int c = 0; c < pd.space.size(); ++c) {
            const int t = pd.space.map->entities[c];
            const auto& tri = mesh.triangles[t];
            const double area = mesh.triangle_area(t);
            double exact = 0.0;
            for (std::size_t i = 0; i < lr.nodes.size(); ++i)
                for (std::size_t j = 0; j < tr.weights.size(); ++j) {
                    Point x{0.0, 0.0};
                    for (int v = 0; v < 3; ++v) {
                        x.x += tr.bary[j][v] * mesh.nodes[tri[v]].x;
                        x.y += tr.bary[j][v] * mesh.nodes[tri[v]].y;
                    }
                    exact += lr.weights[i] * k * tr.weights[j] * area * f(t0 + lr.nodes[i] * k, x);
                }
            lhs += p(c, m) * (exact - k * area * pf.coeffs(c, m));
            scale += std::abs(p(c, m) * exact);
        }
    }
    return std::abs(lhs) / scale;
}

double stability_ratio(const ProblemData& pd, std::mt19937& rng) {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        ControlFunction q = zero_control(pd.space, pd.grid);
        q.coeffs = random_mat(rng, q.coeffs.rows(), pd.grid.M());
        const Vec u0 = random_mat(rng, pd.ops->num_dofs(), 1).col(0);
        const double nu = 0.2 + 0.5 * trial;
        const auto& ops = *pd.ops;
        const Trajectory U = solve_state(ops, pd.space, nu, q, u0);
        double lhs = U.terminal().dot(ops.M * U.terminal());
        for (int m = 0; m < pd.grid.M(); ++m) lhs += nu * pd.grid.k[m] * U.values.col(m).dot(ops.K * U.values.col(m));
        const double bq = norm(q, pd.space);
        worst = std::max(worst, lhs / (nu * bq * bq + u0.dot(ops.M * u0)));
    }
    return worst;
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const SelfCheckOptions& opts) {
    std::mt19937 rng(opts.seed);
    std::vector<CheckResult> out;
    const std::vector<Case> cs = cases(opts);
    for (const Case& c : cs) derivative_checks(c, rng, out);

    for (int level : {0, 1, 2, 3}) {
        const ProblemData pd = build_problem(example_config("example3"), 1, level);
        out.push_back(upper("mass entry sum level " + std::to_string(level), std::abs(pd.ops->M_full.sum() - 1.0), 1e-12));
    }
    out.push_back(upper("control projection orthogonality example3/p0", projection_orthogonality(cs[2].pd, rng), 1e-12));
    out.push_back(upper("dG(0) stability constant example3/p0", stability_ratio(cs[2].pd, rng), 10.0));

    if (opts.solves) {
        for (std::size_t i : {std::size_t(0), std::size_t(2)}) {
            const ProblemData& pd = cs[i].pd;
            const SolveReport r = solve(pd);
            out.push_back(lower("converged " + cs[i].label, r.converged ? 1.0 : 0.0, 1.0));
            out.push_back(upper("feasibility |g| " + cs[i].label, std::abs(r.g), r.options.tol_g));
            out.push_back(upper("multiplier identity " + cs[i].label,
                                std::abs(r.multiplier_identity - r.mu) / (1.0 + r.mu), 1e-6));
            out.push_back(upper("projection residual " + cs[i].label, r.projection_residual, r.options.tol_s));
        }
    }
    return out;
}

void write_selfcheck(std::ostream& os, const std::vector<CheckResult>& results) {
    std::size_t w = 0;
    for (const auto& r : results) w = std::max(w, r.name.size());
    for (const auto& r : results)
        os << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(int(w)) << r.name << std::right << "  "
           << std::scientific << std::setprecision(3) << r.value << (r.upper ? " <= " : " >= ") << r.threshold
           << std::defaultfloat << "\n";
}

bool all_passed(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
}

}  // namespace heatopt
