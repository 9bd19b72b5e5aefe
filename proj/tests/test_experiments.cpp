#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heatopt/experiments.hpp"
#include "heatopt/quadrature.hpp"

using namespace heatopt;

namespace {

std::string without_last_column(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("eoc") {
    auto e = compute_eoc({1.0, 0.5, 0.25}, 2.0);
    REQUIRE(e.size() == 2);
    CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e[1] == doctest::Approx(1.0).epsilon(1e-14));
    e = compute_eoc({1.0, 0.25, 0.0625}, 2.0);
    CHECK(e[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(e[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(compute_eoc({1e-3, 1e-3}, 2.0)[0] == 0.0);
    CHECK(std::isnan(compute_eoc({1.0, 0.0}, 2.0)[0]));
    CHECK(compute_eoc({1.0}, 2.0).empty());
    CHECK_THROWS_AS(compute_eoc({1.0, 0.5}, 1.0), ConfigError);
}

TEST_CASE("example registry") {
    CHECK(example_keys() == std::vector<std::string>{"example1", "example2", "example3"});
    const ExampleConfig e1 = example_config("example1");
    CHECK(e1.c_diff == doctest::Approx(1.0 / (2.0 * M_PI * M_PI)).epsilon(1e-15));
    CHECK(e1.alpha == 1.0);
    CHECK(e1.delta0 == 0.5);
    CHECK(!e1.bounds);
    CHECK(e1.analytic);

    const ExampleConfig e2 = example_config("example2");
    CHECK(e2.alpha == 1e-2);
    REQUIRE(e2.bounds);
    CHECK(e2.bounds->lower == -1.5);
    CHECK(e2.bounds->upper == 0.0);
    CHECK(e2.delta0 == 0.1);
    CHECK(e2.forms.size() == 2);
    CHECK(e2.default_kind == ControlKind::Parameter);

    const ExampleConfig e3 = example_config("example3");
    CHECK(e3.alpha == 1e-2);
    REQUIRE(e3.bounds);
    CHECK(e3.bounds->lower == -5.0);
    CHECK(e3.bounds->upper == 0.0);
    CHECK(e3.delta0 == 0.1);
    CHECK(e3.c_diff == 0.03);
    REQUIRE(e3.omega.size() == 1);
    CHECK(e3.omega[0].x1 == 0.75);
    CHECK(e3.omega[0].y1 == 0.75);

    CHECK_THROWS_AS(example_config("example4"), ConfigError);
    CHECK(node_count(2) == 289);
    CHECK(node_count(3) == 1089);
    CHECK(node_count(5) == 16641);
    CHECK_THROWS_AS(squares_per_side(-1), ConfigError);
}

TEST_CASE("example1 closed forms satisfy the optimality system") {
    // u = a(t) phi, z = b(t) phi with -c Lap phi = phi, |phi|^2 = 1/4
    const double nu = example1::nu_bar();
    CHECK(nu == std::log(2.0));
    const double alpha = 1.0, mu = 4.0, delta0 = 0.5;
    auto phi = [](const Point& x) { return std::sin(M_PI * x.x) * std::sin(M_PI * x.y); };
    auto a = [&](double t) { return 2.0 * (std::exp(-nu * t) - std::exp(nu * (t - 1.0))); };
    auto da = [&](double t) { return 2.0 * (-nu * std::exp(-nu * t) - nu * std::exp(nu * (t - 1.0))); };
    auto b = [&](double t) { return 4.0 * std::exp(nu * (t - 1.0)); };
    auto db = [&](double t) { return nu * b(t); };
    for (double t : {0.0, 0.13, 0.5, 0.87, 1.0}) {
        for (Point x : {Point{0.3, 0.6}, Point{0.5, 0.5}, Point{0.91, 0.07}}) {
            const double p = phi(x);
            CHECK(std::abs(example1::u_bar(t, x) - a(t) * p) < 1e-14);
            CHECK(std::abs(example1::z_bar(t, x) - b(t) * p) < 1e-14);
            // state: u_t - nu c Lap u = nu q
            CHECK(std::abs(da(t) * p + nu * example1::u_bar(t, x) - nu * example1::q_bar(t, x)) < 1e-12);
            // adjoint: -z_t - nu c Lap z = 0
            CHECK(std::abs(-db(t) * p + nu * example1::z_bar(t, x)) < 1e-12);
            // projection without bounds
            CHECK(std::abs(example1::q_bar(t, x) + example1::z_bar(t, x) / alpha) < 1e-14);
        }
    }
    for (Point x : {Point{0.2, 0.4}, Point{0.75, 0.5}}) {
        CHECK(std::abs(example1::u_bar(0.0, x) - phi(x)) < 1e-14);
        // z(1) = mu (u(1) - u_d), u_d = -2 phi
        CHECK(std::abs(example1::z_bar(1.0, x) - mu * (example1::u_bar(1.0, x) + 2.0 * phi(x))) < 1e-12);
    }
    // |u(1) - u_d| = |phi| = delta0
    CHECK(std::abs(std::abs(a(1.0) + 2.0) * 0.5 - delta0) < 1e-14);
    // int_0^1 1 + alpha/2 |q|^2 + (q + c Lap u, z) dt = 0
    const LineRule& r = gauss_legendre01(5);
    double h = 0.0;
    const int pieces = 64;
    for (int i = 0; i < pieces; ++i)
        for (std::size_t k = 0; k < r.nodes.size(); ++k) {
            const double t = (i + r.nodes[k]) / pieces;
            const double q = -b(t) / alpha;
            h += r.weights[k] / pieces * (1.0 + 0.5 * alpha * q * q * 0.25 + (q - a(t)) * b(t) * 0.25);
        }
    CHECK(std::abs(h) < 1e-12);
}

TEST_CASE("analytic errors of a coarse solve") {
    const ProblemData pd = build_problem(example_config("example1"), 8, 1);
    const SolveReport r = solve(pd);
    REQUIRE(r.converged);
    const DiscretizationErrors e = analytic_errors(pd, r);
    CHECK(e.err_nu == doctest::Approx(std::abs(r.nu - std::log(2.0))).epsilon(1e-15));
    CHECK(e.err_nu < 0.05);
    CHECK(e.err_q > 0.0);
    CHECK(e.err_q < 0.5);
    CHECK(e.err_u > 0.0);
    CHECK(e.err_u < 0.1);
}

TEST_CASE("control prolongation is exact on nested grids") {
    for (const char* key : {"example2", "example3"}) {
        const ExampleConfig cfg = example_config(key);
        for (ControlKind kind : {ControlKind::PiecewiseConstant, ControlKind::PiecewiseLinear, ControlKind::Parameter}) {
            if ((kind == ControlKind::Parameter) != !cfg.forms.empty()) continue;
            CAPTURE(key);
            CAPTURE(static_cast<int>(kind));
            const ProblemData c = build_problem(cfg, 3, 0, kind);
            const ProblemData f = build_problem(cfg, 12, 2, kind);
            ControlFunction q = zero_control(c.space, c.grid);
            for (Eigen::Index i = 0; i < q.coeffs.size(); ++i) q.coeffs.data()[i] = std::sin(1.0 + 0.37 * double(i));
            const Mat qf = prolongate_control(c.space, q, f.space, f.grid);
            const double nc = norm(q.coeffs, c.grid, c.space);
            CHECK(norm(qf, f.grid, f.space) == doctest::Approx(nc).epsilon(1e-12));
            // <P e_i, P q> = <e_i, q> for every coarse basis function
            const Mat cross = [&] {
                Mat g(q.coeffs.rows(), q.coeffs.cols());
                ControlFunction e = q;
                for (Eigen::Index i = 0; i < q.coeffs.size(); ++i) {
                    e.coeffs.setZero();
                    e.coeffs.data()[i] = 1.0;
                    g.data()[i] = inner(prolongate_control(c.space, e, f.space, f.grid), qf, f.grid, f.space);
                }
                return g;
            }();
            for (Eigen::Index i = 0; i < q.coeffs.size(); ++i) {
                ControlFunction e = q;
                e.coeffs.setZero();
                e.coeffs.data()[i] = 1.0;
                CHECK(cross.data()[i] == doctest::Approx(inner(e.coeffs, q.coeffs, c.grid, c.space)).epsilon(1e-12));
            }
        }
    }
    const ExampleConfig cfg = example_config("example3");
    const ProblemData c = build_problem(cfg, 3, 0);
    const ProblemData f = build_problem(cfg, 4, 1);
    CHECK_THROWS_AS(prolongate_control(c.space, zero_control(c.space, c.grid), f.space, f.grid), ConfigError);
}

TEST_CASE("reference errors vanish against the same solution") {
    const ProblemData pd = build_problem(example_config("example3"), 4, 0);
    const SolveReport r = solve(pd);
    REQUIRE(r.converged);
    const DiscretizationErrors e = reference_errors(pd, r, pd, r);
    CHECK(e.err_nu == 0.0);
    CHECK(e.err_q < 1e-14);
    CHECK(e.err_u < 1e-14);
}

TEST_CASE("convergence study") {
    StudyOptions o;
    o.axis = StudyAxis::Time;
    o.levels = {2, 4};
    o.fixed = 0;
    o.kind = ControlKind::Variational;
    const ExampleConfig cfg = example_config("example1");
    const auto rows = convergence_study(cfg, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].M == 2);
    CHECK(rows[1].M == 4);
    CHECK(rows[1].N == 25);
    CHECK(std::isnan(rows[0].eoc_nu));
    CHECK(rows[1].eoc_nu == doctest::Approx(compute_eoc({rows[0].err_nu, rows[1].err_nu}, 2.0)[0]));
    for (const auto& r : rows) {
        CHECK(r.converged);
        CHECK(r.err_nu >= 0.0);
        CHECK(r.err_q >= 0.0);
        CHECK(r.err_u >= 0.0);
    }
    std::ostringstream a, b;
    write_study_csv(a, rows);
    write_study_csv(b, convergence_study(cfg, o));
    CHECK(a.str().rfind("level,M,N,err_nu,err_q,err_u,eoc_nu,eoc_q,eoc_u,seconds\n", 0) == 0);
    // identical reruns apart from wall time
    CHECK(without_last_column(a.str()) == without_last_column(b.str()));
    std::ostringstream svg;
    write_study_svg(svg, rows, StudyAxis::Time);
    std::size_t lines = 0;
    for (std::size_t p = svg.str().find("<polyline"); p != std::string::npos; p = svg.str().find("<polyline", p + 1))
        ++lines;
    CHECK(lines == 3);
    CHECK(svg.str().find("slope 2") != std::string::npos);

    o.levels = {2};
    CHECK_THROWS_AS(convergence_study(cfg, o), ConfigError);
    o.levels = {2, 3};
    CHECK_THROWS_AS(convergence_study(cfg, o), ConfigError);
    o.axis = StudyAxis::Space;
    o.levels = {0, 2};
    CHECK_THROWS_AS(convergence_study(cfg, o), ConfigError);
    CHECK(parse_axis("space") == StudyAxis::Space);
    CHECK_THROWS_AS(parse_axis("depth"), ConfigError);
}

TEST_CASE("reference study for a bounded example") {
    StudyOptions o;
    o.axis = StudyAxis::Space;
    o.levels = {0, 1};
    o.fixed = 4;
    o.reference_depth = 1;
    const auto rows = convergence_study(example_config("example3"), o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].err_nu > rows[1].err_nu);
    CHECK(rows[0].err_q > rows[1].err_q);
}

TEST_CASE("ssc sweep") {
    const ExampleConfig cfg = example_config("example2");
    SscSweepOptions o;
    o.alphas = {1.0};
    o.grids = {{8, 1}};
    const auto cells = ssc_sweep(cfg, o);
    REQUIRE(cells.size() == 1);
    REQUIRE(cells[0].ok);
    CHECK(cells[0].error.empty());
    ExampleConfig c1 = cfg;
    c1.alpha = 1.0;
    const ProblemData pd = build_problem(c1, 8, 1);
    const SscReport direct = ssc_check(pd, solve(pd));
    CHECK(cells[0].report.gamma == direct.gamma);
    CHECK(cells[0].report.kappa_lower == direct.kappa_lower);
    CHECK(cells[0].report.inactive_fraction == direct.inactive_fraction);

    std::ostringstream csv;
    write_ssc_csv(csv, cells);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "alpha,M,N,gamma,kappa_lower,minres_iters,residual,inactive_frac");
    std::getline(in, line);
    CHECK(line.rfind("1,8,81,", 0) == 0);

    // a failing cell is recorded and the sweep continues
    o.alphas = {1.0, 0.5};
    o.solver.max_outer = 1;
    const auto bad = ssc_sweep(cfg, o);
    REQUIRE(bad.size() == 2);
    for (const auto& c : bad) {
        CHECK(!c.ok);
        CHECK(!c.error.empty());
    }
    std::ostringstream table;
    write_ssc_table(table, bad);
    CHECK(table.str().find("failed") != std::string::npos);

    o.alphas = {-1.0};
    CHECK_THROWS_AS(ssc_sweep(cfg, o), ConfigError);
}

TEST_CASE("value function curvature on a coarse grid") {
    ExampleConfig cfg = example_config("example2");
    cfg.alpha = 1.0;
    const ProblemData pd = build_problem(cfg, 8, 1);
    const SolveReport r = solve(pd);
    REQUIRE(r.converged);
    CHECK(fixed_time_value(pd, r.nu, r.q) == doctest::Approx(eval_j(pd, r.nu, r.q)).epsilon(1e-8));
    const CurvatureCheck c = value_curvature(pd, r);
    CHECK(c.values[0] > c.values[1]);
    CHECK(c.values[2] > c.values[1]);
    CHECK(c.gamma > 0.0);
    CHECK(c.relative_error < 0.05);
    CHECK_THROWS_AS(value_curvature(pd, r, 0.0), ConfigError);
}

TEST_CASE("atomic file writes") {
    const auto dir = std::filesystem::temp_directory_path() / "heatopt_atomic_test";
    std::filesystem::remove_all(dir);
    const std::string path = (dir / "sub" / "out.txt").string();
    write_file_atomic(path, [](std::ostream& os) { os << "a = 1\n"; });
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    CHECK(s == "a = 1");
    CHECK(!std::filesystem::exists(path + ".tmp"));
    std::filesystem::remove_all(dir);
}
