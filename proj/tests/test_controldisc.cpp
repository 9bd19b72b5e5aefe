#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "heatopt/controldisc.hpp"

using namespace heatopt;

namespace {

struct Setup {
    std::shared_ptr<const FemOperators> ops;
    ControlSpace space;
    TimeGrid grid;
};

Setup make(int n, ControlKind kind, std::vector<Rect> omega, std::optional<Bounds> b = std::nullopt,
           int M = 4) {
    auto mesh = std::make_shared<const Mesh2D>(build_structured_mesh(n, omega));
    Setup s;
    s.ops = std::make_shared<const FemOperators>(assemble(mesh, 1.0, ControlKindFem::Distributed));
    s.space = make_control_space(*s.ops, kind, b);
    s.grid = build_time_grid(M);
    return s;
}

Mat random_mat(std::mt19937& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> nd;
    Mat a(r, c);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    return a;
}

}  // namespace

TEST_CASE("projection onto the admissible set") {
    Setup s = make(4, ControlKind::PiecewiseConstant, {Rect{0, 1, 0, 1}}, Bounds{-1.5, 0.0}, 2);
    ControlFunction q = zero_control(s.space, s.grid);
    q.coeffs(0, 0) = -2.3;
    q.coeffs(1, 0) = 0.7;
    q.coeffs(2, 1) = -0.4;
    const ControlFunction p = project_admissible(q);
    CHECK(p.coeffs(0, 0) == -1.5);
    CHECK(p.coeffs(1, 0) == 0.0);
    CHECK(p.coeffs(2, 1) == -0.4);
    const ControlFunction pp = project_admissible(p);
    CHECK(pp.coeffs == p.coeffs);

    std::mt19937 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        ControlFunction a = q, b = q;
        a.coeffs = random_mat(rng, q.coeffs.rows(), q.M());
        b.coeffs = random_mat(rng, q.coeffs.rows(), q.M());
        ControlFunction d = a;
        d.coeffs = project_admissible(a).coeffs - project_admissible(b).coeffs;
        ControlFunction e = a;
        e.coeffs = a.coeffs - b.coeffs;
        CHECK(norm(d, s.space) <= norm(e, s.space) + 1e-14);
    }
}

TEST_CASE("variational kind keeps its field and cuts off pointwise") {
    Setup s = make(4, ControlKind::Variational, {Rect{0, 1, 0, 1}}, Bounds{-1.0, 0.0}, 1);
    ControlFunction q = zero_control(s.space, s.grid);
    q.coeffs.setConstant(-3.0);
    const ControlFunction p = project_admissible(q);
    CHECK(p.coeffs == q.coeffs);
    CHECK(evaluate_control(s.space, p, 0, Point{0.5, 0.5}) == -1.0);
}

TEST_CASE("control discretization operator") {
    SUBCASE("constants are reproduced") {
        for (ControlKind kind : {ControlKind::PiecewiseConstant, ControlKind::PiecewiseLinear}) {
            Setup s = make(4, kind, {Rect{0, 0.75, 0, 0.75}});
            const ControlFunction q = apply_isigma(s.space, s.grid, [](double, const Point&) { return 2.5; });
            CHECK((q.coeffs.array() - 2.5).abs().maxCoeff() < 1e-14);
        }
    }
    SUBCASE("cell averages of x1 are centroid values") {
        Setup s = make(2, ControlKind::PiecewiseConstant, {Rect{0, 1, 0, 1}}, std::nullopt, 1);
        const ControlFunction q = apply_isigma(s.space, s.grid, [](double, const Point& x) { return x.x; });
        for (int c = 0; c < s.space.size(); ++c)
            CHECK(std::abs(q.coeffs(c, 0) - s.ops->mesh->centroid(s.space.map->entities[c]).x) < 1e-15);
    }
    SUBCASE("idempotent") {
        Setup s = make(4, ControlKind::PiecewiseConstant, {Rect{0, 0.75, 0, 0.75}});
        const ControlFunction q =
            apply_isigma(s.space, s.grid, [](double t, const Point& x) { return std::sin(3 * t + x.x * x.y); });
        const ControlFunction q2 = apply_isigma(s.space, s.grid, [&](double t, const Point& x) {
            const int m = std::min(s.grid.M() - 1, static_cast<int>(t * s.grid.M()));
            return evaluate_control(s.space, q, m, x);
        });
        CHECK((q2.coeffs - q.coeffs).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("orthogonality of the P0 x P0 projection") {
        Setup s = make(4, ControlKind::PiecewiseConstant, {Rect{0, 0.75, 0, 0.75}});
        auto f = [](double t, const Point& x) { return t * x.x + x.y * x.y - 0.3 * t * t; };
        const ControlFunction pq = apply_isigma(s.space, s.grid, f);
        std::mt19937 rng(11);
        // <f - Pf, p> = sum_m sum_K p_{K,m} (int f - k|K| Pf); exact quadrature for this polynomial.
        for (int trial = 0; trial < 20; ++trial) {
            const Mat p = random_mat(rng, s.space.size(), s.grid.M());
            double lhs = 0.0;
            const auto& mesh = *s.ops->mesh;
            for (int m = 0; m < s.grid.M(); ++m)
                for (int c = 0; c < s.space.size(); ++c) {
                    const int t = s.space.map->entities[c];
                    // exact integral of f over I_m x K: time part is polynomial of degree 2
                    const double t0 = s.grid.t[m], t1 = s.grid.t[m + 1];
                    const Point g = mesh.centroid(t);
                    const double area = mesh.triangle_area(t);
                    // int_K x2^2 = area * (mean of squares) for P1 coordinates
                    double y2 = 0.0;
                    const auto& tri = mesh.triangles[t];
                    double ys[3];
                    for (int i = 0; i < 3; ++i) ys[i] = mesh.nodes[tri[i]].y;
                    y2 = area / 6.0 * (ys[0] * ys[0] + ys[1] * ys[1] + ys[2] * ys[2] + ys[0] * ys[1] +
                                       ys[1] * ys[2] + ys[0] * ys[2]);
                    const double it1 = 0.5 * (t1 * t1 - t0 * t0);
                    const double it2 = (t1 * t1 * t1 - t0 * t0 * t0) / 3.0;
                    const double exact = it1 * area * g.x + (t1 - t0) * y2 - 0.3 * it2 * area;
                    lhs += p(c, m) * (exact - s.grid.k[m] * area * pq.coeffs(c, m));
                }
            CHECK(std::abs(lhs) < 1e-12);
        }
    }
    SUBCASE("P1 uses nodal values of interval averages") {
        Setup s = make(4, ControlKind::PiecewiseLinear, {Rect{0, 0.75, 0, 0.75}}, std::nullopt, 2);
        const ControlFunction q = apply_isigma(s.space, s.grid, [](double t, const Point& x) { return t + x.x; });
        for (int c = 0; c < s.space.size(); ++c) {
            const Point p = s.ops->mesh->nodes[s.space.map->entities[c]];
            CHECK(std::abs(q.coeffs(c, 0) - (0.25 + p.x)) < 1e-14);
            CHECK(std::abs(q.coeffs(c, 1) - (0.75 + p.x)) < 1e-14);
        }
    }
    SUBCASE("variational target is rejected") {
        Setup s = make(4, ControlKind::Variational, {Rect{0, 1, 0, 1}});
        CHECK_THROWS_AS(apply_isigma(s.space, s.grid, [](double, const Point&) { return 0.0; }), ConfigError);
    }
}

TEST_CASE("control inner products") {
    SUBCASE("measure of (0,0.75)^2") {
        for (ControlKind kind : {ControlKind::PiecewiseConstant, ControlKind::PiecewiseLinear}) {
            Setup s = make(4, kind, {Rect{0, 0.75, 0, 0.75}});
            ControlFunction q = zero_control(s.space, s.grid);
            q.coeffs.setConstant(1.0);
            CHECK(norm(q, s.space) * norm(q, s.space) == doctest::Approx(0.5625).epsilon(1e-13));
        }
    }
    SUBCASE("parameter controls use the counting measure") {
        const std::vector<Rect> forms{{0, 0.5, 0, 1}, {0.5, 1, 0, 0.5}};
        auto mesh = std::make_shared<const Mesh2D>(build_structured_mesh(4, forms));
        const FemOperators ops = assemble(mesh, 1.0, ControlKindFem::Parameter, forms);
        const ControlSpace space = make_control_space(ops, ControlKind::Parameter, std::nullopt, forms);
        ControlFunction q = zero_control(space, build_time_grid(8));
        q.coeffs.row(0).setConstant(1.0);
        CHECK(norm(q, space) == doctest::Approx(1.0).epsilon(1e-14));
        const ControlFunction a =
            apply_isigma(space, build_time_grid(2), ParameterField([](double t) { return Vec::Constant(2, t); }));
        CHECK(a.coeffs(0, 0) == doctest::Approx(0.25));
        CHECK(a.coeffs(1, 1) == doctest::Approx(0.75));
    }
    SUBCASE("Cauchy-Schwarz and kind mismatch") {
        Setup s = make(4, ControlKind::PiecewiseLinear, {Rect{0, 0.75, 0, 0.75}});
        std::mt19937 rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            ControlFunction a = zero_control(s.space, s.grid), b = a;
            a.coeffs = random_mat(rng, a.coeffs.rows(), a.M());
            b.coeffs = random_mat(rng, a.coeffs.rows(), a.M());
            CHECK(std::abs(inner(a, b, s.space)) <= norm(a, s.space) * norm(b, s.space) * (1 + 1e-14));
        }
        ControlFunction a = zero_control(s.space, s.grid), b = a;
        b.kind = ControlKind::PiecewiseConstant;
        CHECK_THROWS_AS(inner(a, b, s.space), ConfigError);
    }
}

TEST_CASE("control CSV") {
    Setup s = make(2, ControlKind::PiecewiseConstant, {Rect{0, 0.5, 0, 1}}, std::nullopt, 2);
    ControlFunction q = zero_control(s.space, s.grid);
    std::ostringstream os;
    write_control_csv(os, q);
    const std::string out = os.str();
    CHECK(out.rfind("t_start,t_end,c0,c1,c2,c3\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 3);
}
