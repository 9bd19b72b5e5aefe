#include <doctest.h>

#include <cmath>
#include <random>

#include "heatopt/fem.hpp"

using namespace heatopt;

namespace {

std::shared_ptr<const Mesh2D> mesh_ptr(int n, std::vector<Rect> omega = {Rect{0, 1, 0, 1}}) {
    return std::make_shared<const Mesh2D>(build_structured_mesh(n, omega));
}

double sinsin(const Point& p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); }

}  // namespace

TEST_CASE("degenerate level without interior dofs") {
    const FemOperators ops = assemble(mesh_ptr(1), 1.0, ControlKindFem::Distributed);
    CHECK(ops.num_dofs() == 0);
    CHECK(ops.M.rows() == 0);
}

TEST_CASE("mass entries sum to the area and stiffness kills constants") {
    for (int n : {4, 7, 16}) {
        const FemOperators ops = assemble(mesh_ptr(n), 1.0, ControlKindFem::Distributed);
        CHECK(std::abs(ops.M_full.sum() - 1.0) < 1e-12);
        const Vec ones = Vec::Ones(ops.A_full.rows());
        CHECK((ops.A_full * ones).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((SpMat(ops.M - SpMat(ops.M.transpose()))).norm() == 0.0);
        CHECK((SpMat(ops.A - SpMat(ops.A.transpose()))).norm() == 0.0);
    }
}

TEST_CASE("linear functions are discrete harmonic away from the boundary") {
    const FemOperators ops = assemble(mesh_ptr(8), 1.0, ControlKindFem::Distributed);
    Vec x1(ops.mesh->num_nodes());
    for (std::size_t i = 0; i < ops.mesh->num_nodes(); ++i) x1[i] = ops.mesh->nodes[i].x;
    const Vec r = ops.A_full * x1;
    for (int d = 0; d < ops.num_dofs(); ++d) CHECK(std::abs(r[ops.interior_nodes[d]]) < 1e-12);
}

TEST_CASE("stiffness is the five point stencil on this mesh") {
    const FemOperators ops = assemble(mesh_ptr(4), 1.0, ControlKindFem::Distributed);
    const int c = ops.mesh->node_at(2, 2);
    CHECK(ops.A_full.coeff(c, c) == doctest::Approx(4.0));
    CHECK(ops.A_full.coeff(c, ops.mesh->node_at(3, 2)) == doctest::Approx(-1.0));
    CHECK(std::abs(ops.A_full.coeff(c, ops.mesh->node_at(3, 3))) < 1e-14);
}

TEST_CASE("Galerkin stiffness equals exact gradient integral") {
    const FemOperators ops = assemble(mesh_ptr(6), 1.0, ControlKindFem::Distributed);
    // u = x1 + 2 x2 interpolated: |grad u|^2 = 5 on the whole square.
    Vec u(ops.mesh->num_nodes());
    for (std::size_t i = 0; i < ops.mesh->num_nodes(); ++i) u[i] = ops.mesh->nodes[i].x + 2 * ops.mesh->nodes[i].y;
    CHECK(std::abs(u.dot(ops.A_full * u) - 5.0) < 1e-12);
}

TEST_CASE("L2 projection") {
    const FemOperators ops = assemble(mesh_ptr(8), 1.0, ControlKindFem::Distributed);
    SUBCASE("idempotent on V_h") {
        const int d = 17;
        const Vec full = ops.extend(Vec::Unit(ops.num_dofs(), d));
        const Vec p = l2_project(ops, [&](const Point& x) { return evaluate_p1(*ops.mesh, full, x); });
        CHECK((p - Vec::Unit(ops.num_dofs(), d)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("zero") {
        const Vec p = l2_project(ops, [](const Point&) { return 0.0; });
        CHECK(p.norm() == 0.0);
    }
    SUBCASE("second order error and contraction") {
        double prev = 0.0;
        for (int n : {16, 32, 64, 128}) {
            const FemOperators o = assemble(mesh_ptr(n), 1.0, ControlKindFem::Distributed);
            const Vec p = l2_project(o, sinsin);
            const double e = l2_error(o, p, sinsin);
            CHECK(std::sqrt(p.dot(o.M * p)) <= 0.5 + 1e-12);
            if (prev > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.05));
            prev = e;
        }
    }
}

TEST_CASE("B and B* duality and identities") {
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    auto random_vec = [&](Eigen::Index n) {
        Vec v(n);
        for (auto& x : v) x = nd(rng);
        return v;
    };
    SUBCASE("parameter forms of the purely time dependent example") {
        const std::vector<Rect> forms{{0, 0.5, 0, 1}, {0.5, 1, 0, 0.5}};
        const auto mesh = mesh_ptr(8, forms);
        const FemOperators ops = assemble(mesh, 1.0, ControlKindFem::Parameter, forms);
        // B* of the constant one: the full-node load of each indicator sums to its measure,
        // and its interior part is the corresponding column of the load map.
        const std::vector<double> expected{0.5, 0.25};
        for (int c = 0; c < 2; ++c) {
            const Vec full = load_vector_full(*mesh, [&](const Point& p) { return forms[c].contains(p) ? 1.0 : 0.0; }, 1);
            CHECK(full.sum() == doctest::Approx(expected[c]).epsilon(1e-14));
            const Vec col = ops.control_map.E.col(c);
            for (int d = 0; d < ops.num_dofs(); ++d) CHECK(std::abs(col[d] - full[ops.interior_nodes[d]]) < 1e-15);
        }
        for (int trial = 0; trial < 100; ++trial) {
            const Vec q = random_vec(2), z = random_vec(ops.num_dofs());
            const double lhs = apply_B(ops, q).dot(z);
            const double rhs = q.dot(ops.control_map.Mc * apply_Bstar(ops, z));
            CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
        }
    }
    SUBCASE("distributed on the whole square") {
        const FemOperators ops = assemble(mesh_ptr(8), 1.0, ControlKindFem::Distributed);
        const Vec z = l2_project(ops, sinsin);
        const Vec bz = apply_Bstar(ops, z);
        // Coefficients live on all nodes of omega; restrict to interior nodes.
        Vec r(ops.num_dofs());
        for (int d = 0; d < ops.num_dofs(); ++d) {
            const auto& ents = ops.control_map.entities;
            const auto it = std::lower_bound(ents.begin(), ents.end(), ops.interior_nodes[d]);
            r[d] = bz[it - ents.begin()];
        }
        CHECK((r - z).cwiseAbs().maxCoeff() < 1e-10);
        for (int trial = 0; trial < 100; ++trial) {
            const Vec q = random_vec(ops.control_map.size()), zz = random_vec(ops.num_dofs());
            const double lhs = apply_B(ops, q).dot(zz);
            const double rhs = q.dot(ops.control_map.Mc * apply_Bstar(ops, zz));
            CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
        }
    }
    SUBCASE("B* B is the identity on control coefficients") {
        const FemOperators ops = assemble(mesh_ptr(8), 1.0, ControlKindFem::Distributed);
        const ControlMap map = make_nodal_control_map(ops, false);
        const Vec q = random_vec(map.size());
        // With omega = Omega the interior nodal controls are V_h itself, so B q = M^{-1} E q.
        const Vec field = ops.mass_factor->solve(apply_B(map, q));
        CHECK((field - q).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((apply_Bstar(map, field) - q).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("shape errors") {
        const FemOperators ops = assemble(mesh_ptr(4), 1.0, ControlKindFem::Distributed);
        CHECK_THROWS_AS(apply_B(ops, Vec::Zero(3)), ConfigError);
        CHECK_THROWS_AS(apply_Bstar(ops, Vec::Zero(3)), ConfigError);
    }
}

TEST_CASE("pairing with the discrete Laplacian") {
    const double c = 1.0 / (2 * M_PI * M_PI);
    double prev_gap = 1.0;
    for (int n : {8, 16, 32}) {
        const FemOperators ops = assemble(mesh_ptr(n), c, ControlKindFem::Distributed);
        Vec u(ops.num_dofs());
        for (int d = 0; d < ops.num_dofs(); ++d) u[d] = sinsin(ops.mesh->nodes[ops.interior_nodes[d]]);
        CHECK(pair_with_discrete_laplacian(ops, u, u) <= 0.0);
        CHECK(pair_with_discrete_laplacian(ops, u, Vec::Zero(ops.num_dofs())) == 0.0);
        const double gap = std::abs(pair_with_discrete_laplacian(ops, u, u) + u.dot(ops.M * u));
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 5e-3);
}

TEST_CASE("distributed control without a tagged region") {
    CHECK_THROWS_AS(assemble(mesh_ptr(4, {}), 1.0, ControlKindFem::Distributed), ConfigError);
}

TEST_CASE("prolongation is exact on nested meshes") {
    const FemOperators coarse = assemble(mesh_ptr(4), 1.0, ControlKindFem::Distributed);
    const FemOperators fine = assemble(mesh_ptr(16), 1.0, ControlKindFem::Distributed);
    const Vec u = l2_project(coarse, sinsin);
    const Vec uf = prolongate(coarse, fine, u);
    // Same function: identical L2 norms and identical values at coarse nodes.
    CHECK(std::abs(u.dot(coarse.M * u) - uf.dot(fine.M * uf)) < 1e-14);
    for (int d = 0; d < coarse.num_dofs(); ++d) {
        const Point p = coarse.mesh->nodes[coarse.interior_nodes[d]];
        CHECK(evaluate_p1(*fine.mesh, fine.extend(uf), p) == doctest::Approx(u[d]).epsilon(1e-14));
    }
}

TEST_CASE("step factorization cache") {
    const FemOperators ops = assemble(mesh_ptr(8), 1.0, ControlKindFem::Distributed);
    const auto f1 = ops.step_factor(1.3, 0.25);
    const auto f2 = ops.step_factor(1.3, 0.25);
    CHECK(f1.get() == f2.get());
    CHECK(ops.step_cache->factorizations() == 1);
    const Vec b = Vec::Ones(ops.num_dofs());
    const Vec x = f1->solve(b);
    CHECK(((ops.M + (1.3 * 0.25) * ops.K) * x - b).norm() < 1e-12);
}
