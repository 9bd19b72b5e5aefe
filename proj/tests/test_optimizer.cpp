#include <doctest.h>

#include <cmath>
#include <sstream>

#include "heatopt/experiments.hpp"
#include "heatopt/optimizer.hpp"

using namespace heatopt;

namespace {

ControlFunction with(const ControlFunction& q, const Mat& c) {
    ControlFunction r = q;
    r.coeffs = c;
    return r;
}

void check_kkt(const ProblemData& pd, const SolveReport& r) {
    REQUIRE(r.converged);
    CHECK(std::abs(r.g) < 1e-9);
    CHECK(r.stationarity <= 1e-8);
    CHECK(r.mu > 1e-8);
    CHECK(r.nu > 0.0);
    CHECK(std::abs(r.multiplier_identity - r.mu) <= 1e-6 * (1.0 + r.mu));
    CHECK(r.hamiltonian_residual <= 1e-8);
    if (pd.space.bounds) {
        CHECK(r.q.coeffs.minCoeff() >= pd.space.bounds->lower);
        CHECK(r.q.coeffs.maxCoeff() <= pd.space.bounds->upper);
    }
}

}  // namespace

TEST_CASE("auglag update") {
    SolverOptions o;
    AugLagState s;
    s.mu = 0.0;
    s.rho = 1.0;
    s.last_abs_g = 2.0;
    AugLagState t = auglag_update(s, -0.3, o);
    CHECK(t.mu == 0.0);
    CHECK(t.rho == 1.0);
    CHECK(t.last_abs_g == 0.3);
    s.last_abs_g = 1.0;
    CHECK(auglag_update(s, -0.3, o).rho == 10.0);

    s.mu = 1.0;
    s.rho = 10.0;
    s.last_abs_g = 1.0;
    t = auglag_update(s, 0.05, o);
    CHECK(t.mu == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(t.rho == 10.0);
    CHECK(t.tol_inner == doctest::Approx(0.005));

    // |g| did not fall by the factor 0.25
    s.last_abs_g = 0.1;
    t = auglag_update(s, 0.05, o);
    CHECK(t.rho == 100.0);
    CHECK(t.tol_inner == doctest::Approx(0.005));

    t = auglag_update(s, 1e-12, o);
    CHECK(t.tol_inner == o.tol_s);
}

TEST_CASE("augmented value") {
    const ProblemData pd = build_problem(example_config("example2"), 6, 0);
    Iterate it(1.2, zero_control(pd.space, pd.grid));
    const double j = eval_j(pd, 1.2, it.q());
    const double g = eval_g(pd, it);
    REQUIRE(g > 0.0);
    // inactive shift
    const double mu = 0.5, rho_small = 1e-3 * mu / g;
    CHECK(augmented_value(pd, it, mu, rho_small) ==
          doctest::Approx(j + (std::pow(mu + rho_small * g, 2) - mu * mu) / (2 * rho_small)).epsilon(1e-12));
    // mu + rho g < 0 keeps only -mu^2 / (2 rho)
    Iterate far(50.0, zero_control(pd.space, pd.grid));
    const double gf = eval_g(pd, far);
    REQUIRE(gf < 0.0);
    const double rho = 2.0 * mu / -gf;
    CHECK(augmented_value(pd, far, mu, rho) == doctest::Approx(50.0 - mu * mu / (2 * rho)).epsilon(1e-12));
}

TEST_CASE("solve example1 unconstrained") {
    const ProblemData pd = build_problem(example_config("example1"), 16, 1);
    const SolveReport r = solve(pd);
    check_kkt(pd, r);
    CHECK(std::abs(r.nu - std::log(2.0)) < 5e-3);
    CHECK(r.mu == doctest::Approx(4.0).epsilon(0.05));
    CHECK(r.projection_residual <= 1e-8);
}

TEST_CASE("inner solve converges fast without bounds") {
    const ProblemData pd = build_problem(example_config("example1"), 8, 1);
    InnerStats st;
    SolverOptions o;
    Iterate it = inner_solve(pd, default_start(pd), 4.0, 10.0, 1e-10, o, &st);
    CHECK(st.stationarity <= 1e-10);
    CHECK(st.iterations <= 12);
    CHECK(augmented_stationarity(pd, it, 4.0, 10.0) <= 1e-10);
}

TEST_CASE("inner solve decreases the augmented functional") {
    const ProblemData pd = build_problem(example_config("example3"), 6, 0);
    Iterate start = default_start(pd);
    const double f0 = augmented_value(pd, start, 2.0, 100.0);
    SolverOptions o;
    o.max_inner = 3;
    InnerStats st;
    Iterate it = inner_solve(pd, start, 2.0, 100.0, 1e-12, o, &st);
    CHECK(st.iterations == 3);
    CHECK(augmented_value(pd, it, 2.0, 100.0) < f0);
    CHECK(it.q().coeffs.minCoeff() >= -5.0);
    CHECK(it.q().coeffs.maxCoeff() <= 0.0);
}

TEST_CASE("solve with bounds") {
    for (const char* key : {"example2", "example3"}) {
        const ExampleConfig cfg = example_config(key);
        for (ControlKind kind : {ControlKind::PiecewiseConstant, ControlKind::PiecewiseLinear, ControlKind::Parameter}) {
            if ((kind == ControlKind::Parameter) != cfg.forms.size() > 0) continue;
            CAPTURE(key);
            CAPTURE(static_cast<int>(kind));
            const ProblemData pd = build_problem(cfg, 8, 1, kind);
            const SolveReport r = solve(pd);
            check_kkt(pd, r);
            CHECK(r.projection_residual <= 1e-6);
            // some coefficients sit on a bound
            const double lo = pd.space.bounds->lower, hi = pd.space.bounds->upper;
            CHECK(((r.q.coeffs.array() == lo) || (r.q.coeffs.array() == hi)).count() > 0);

            // restart at the solution: no Newton step
            Iterate at(r.nu, r.q);
            const double s0 = augmented_stationarity(pd, at, r.mu, r.rho);
            CHECK(s0 <= 1e-5);
            InnerStats st;
            inner_solve(pd, at, r.mu, r.rho, s0, r.options, &st);
            CHECK(st.iterations == 0);
        }
    }
}

TEST_CASE("solve rejects bad input") {
    const ProblemData pd = build_problem(example_config("example3"), 4, 0);
    CHECK_THROWS_AS(solve(pd, Iterate(0.0, zero_control(pd.space, pd.grid))), ConfigError);
    CHECK_THROWS_AS(solve(pd, Iterate(-1.0, zero_control(pd.space, pd.grid))), ConfigError);
    const ControlFunction q = zero_control(pd.space, pd.grid);
    CHECK_THROWS_AS(solve(pd, Iterate(1.0, with(q, Mat::Constant(q.coeffs.rows(), q.M(), 1.0)))), ConfigError);
    const ProblemData pv = build_problem(example_config("example3"), 4, 0, ControlKind::Variational);
    CHECK_THROWS_AS(solve(pv), ConfigError);
}

TEST_CASE("default start is admissible") {
    const ProblemData pd = build_problem(example_config("example2"), 4, 0);
    const Iterate it = default_start(pd);
    CHECK(it.nu() == 1.0);
    CHECK(it.q().coeffs.isZero(0.0));
}

TEST_CASE("report output") {
    const ProblemData pd = build_problem(example_config("example1"), 4, 0);
    const SolveReport r = solve(pd);
    std::ostringstream os;
    write_report(os, r);
    const std::string s = os.str();
    for (const char* k : {"converged = true", "nu = ", "mu = ", "g = ", "outer_iterations = ", "tol_g = "})
        CHECK(s.find(k) != std::string::npos);
    std::ostringstream hs;
    write_history_csv(hs, r);
    std::istringstream in(hs.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "outer,g,mu,rho,nu,inner,stationarity");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == r.outer_iterations);
}
