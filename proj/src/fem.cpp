#include "heatopt/fem.hpp"

#include <algorithm>
#include <cmath>

#include "heatopt/quadrature.hpp"

namespace heatopt {

using Triplet = Eigen::Triplet<double>;

namespace {

struct ElementGeometry {
    double area;
    double grad[3][2];  // gradients of the barycentric coordinates
};

ElementGeometry geometry(const Mesh2D& mesh, std::size_t t) {
    const auto& tri = mesh.triangles[t];
    ElementGeometry g;
    g.area = mesh.triangle_area(t);
    for (int i = 0; i < 3; ++i) {
        const Point& b = mesh.nodes[tri[(i + 1) % 3]];
        const Point& c = mesh.nodes[tri[(i + 2) % 3]];
        g.grad[i][0] = (b.y - c.y) / (2.0 * g.area);
        g.grad[i][1] = (c.x - b.x) / (2.0 * g.area);
    }
    return g;
}

double local_mass(double area, int i, int j) { return area / 12.0 * (i == j ? 2.0 : 1.0); }

SpMat restrict_sym(const SpMat& full, const std::vector<int>& index, int n) {
    std::vector<Triplet> trip;
    trip.reserve(full.nonZeros());
    for (int c = 0; c < full.outerSize(); ++c)
        for (SpMat::InnerIterator it(full, c); it; ++it) {
            const int r = index[it.row()], cc = index[it.col()];
            if (r >= 0 && cc >= 0) trip.emplace_back(r, cc, it.value());
        }
    SpMat out(n, n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

void finalize_map(ControlMap& map) {
    map.mc_diag = map.Mc.diagonal();
    if (map.diagonal_mass) return;
    map.mc_factor = std::make_shared<Cholesky>(map.Mc);
    if (map.mc_factor->info() != Eigen::Success) throw ConfigError("control mass matrix is not positive definite");
}

}  // namespace

Mat ControlMap::mass_solve(const Mat& b) const {
    if (diagonal_mass) return mc_diag.cwiseInverse().asDiagonal() * b;
    return mc_factor->solve(b);
}

Mat ControlMap::mass_apply(const Mat& x) const {
    if (diagonal_mass) return mc_diag.asDiagonal() * x;
    return Mc * x;
}

std::shared_ptr<const Cholesky> FactorizationCache::get(const SpMat& M, const SpMat& K, double s) {
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->first == s) {
            entries_.splice(entries_.begin(), entries_, it);
            return entries_.front().second;
        }
    }
    SpMat S = M + s * K;
    auto chol = std::make_shared<Cholesky>(S);
    if (chol->info() != Eigen::Success) throw std::runtime_error("step matrix factorization failed");
    ++count_;
    entries_.emplace_front(s, chol);
    if (entries_.size() > capacity_) entries_.pop_back();
    return chol;
}

std::shared_ptr<const Cholesky> FemOperators::step_factor(double nu, double k) const {
    return step_cache->get(M, K, nu * k);
}

Vec FemOperators::extend(const Vec& u) const {
    Vec full = Vec::Zero(static_cast<Eigen::Index>(mesh->num_nodes()));
    for (int d = 0; d < num_dofs(); ++d) full[interior_nodes[d]] = u[d];
    return full;
}

FemOperators assemble(std::shared_ptr<const Mesh2D> mesh, double c_diff, ControlKindFem kind,
                      const std::vector<Rect>& form_specs) {
    if (!(c_diff > 0.0)) throw ConfigError("diffusion coefficient must be positive");
    FemOperators ops;
    ops.mesh = mesh;
    ops.c_diff = c_diff;
    const int n = static_cast<int>(mesh->num_nodes());
    std::vector<Triplet> mt, at;
    mt.reserve(9 * mesh->num_triangles());
    at.reserve(9 * mesh->num_triangles());
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
        const auto g = geometry(*mesh, t);
        const auto& tri = mesh->triangles[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                mt.emplace_back(tri[i], tri[j], local_mass(g.area, i, j));
                at.emplace_back(tri[i], tri[j],
                                g.area * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]));
            }
    }
    ops.M_full.resize(n, n);
    ops.A_full.resize(n, n);
    ops.M_full.setFromTriplets(mt.begin(), mt.end());
    ops.A_full.setFromTriplets(at.begin(), at.end());

    ops.interior_index.assign(n, -1);
    std::vector<char> boundary(n, 0);
    for (int b : mesh->boundary_nodes) boundary[b] = 1;
    for (int i = 0; i < n; ++i)
        if (!boundary[i]) {
            ops.interior_index[i] = static_cast<int>(ops.interior_nodes.size());
            ops.interior_nodes.push_back(i);
        }
    const int nd = ops.num_dofs();
    ops.M = restrict_sym(ops.M_full, ops.interior_index, nd);
    ops.A = restrict_sym(ops.A_full, ops.interior_index, nd);
    ops.K = c_diff * ops.A;
    ops.mass_factor = std::make_shared<Cholesky>(ops.M);
    ops.step_cache = std::make_shared<FactorizationCache>();

    if (kind == ControlKindFem::Distributed) {
        if (mesh->omega_triangles.empty()) throw ConfigError("distributed control needs a tagged control region");
        ops.control_map = make_nodal_control_map(ops, true);
    } else {
        ops.control_map = make_parameter_control_map(ops, form_specs);
    }
    return ops;
}

Vec load_vector_full(const Mesh2D& mesh, const ScalarField& f, int order) {
    const TriangleRule& rule = triangle_rule(order);
    Vec b = Vec::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            const auto& l = rule.bary[q];
            Point p;
            for (int i = 0; i < 3; ++i) {
                p.x += l[i] * mesh.nodes[tri[i]].x;
                p.y += l[i] * mesh.nodes[tri[i]].y;
            }
            const double fw = f(p) * rule.weights[q] * area;
            for (int i = 0; i < 3; ++i) b[tri[i]] += fw * l[i];
        }
    }
    return b;
}

Vec l2_project(const FemOperators& ops, const ScalarField& f, int order) {
    const Vec full = load_vector_full(*ops.mesh, f, order);
    Vec b(ops.num_dofs());
    for (int d = 0; d < ops.num_dofs(); ++d) b[d] = full[ops.interior_nodes[d]];
    if (ops.num_dofs() == 0) return b;
    return ops.mass_factor->solve(b);
}

Vec apply_B(const ControlMap& map, const Vec& q) {
    if (q.size() != map.E.cols()) throw ConfigError("apply_B: control has wrong length");
    return map.E * q;
}

Vec apply_Bstar(const ControlMap& map, const Vec& z) {
    if (z.size() != map.E.rows()) throw ConfigError("apply_Bstar: state has wrong length");
    const Vec r = map.E.transpose() * z;
    return map.mass_solve(r);
}

double pair_with_discrete_laplacian(const FemOperators& ops, const Vec& u, const Vec& z) {
    return -(ops.K * u).dot(z);
}

double l2_error(const FemOperators& ops, const Vec& u, const ScalarField& f, int order) {
    const Mesh2D& mesh = *ops.mesh;
    const Vec full = ops.extend(u);
    const TriangleRule& rule = triangle_rule(order);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            const auto& l = rule.bary[q];
            Point p;
            double uh = 0.0;
            for (int i = 0; i < 3; ++i) {
                p.x += l[i] * mesh.nodes[tri[i]].x;
                p.y += l[i] * mesh.nodes[tri[i]].y;
                uh += l[i] * full[tri[i]];
            }
            const double e = uh - f(p);
            sum += rule.weights[q] * area * e * e;
        }
    }
    return std::sqrt(sum);
}

ControlMap make_nodal_control_map(const FemOperators& ops, bool include_boundary) {
    const Mesh2D& mesh = *ops.mesh;
    std::vector<int> col(mesh.num_nodes(), -1);
    ControlMap map;
    map.layout = include_boundary ? ControlMap::Layout::OmegaNodes : ControlMap::Layout::OmegaInteriorNodes;
    std::vector<char> used(mesh.num_nodes(), 0);
    for (int t : mesh.omega_triangles)
        for (int v : mesh.triangles[t])
            if (include_boundary || ops.interior_index[v] >= 0) used[v] = 1;
    for (std::size_t v = 0; v < used.size(); ++v)
        if (used[v]) {
            col[v] = static_cast<int>(map.entities.size());
            map.entities.push_back(static_cast<int>(v));
        }
    const int nc = static_cast<int>(map.entities.size());
    std::vector<Triplet> et, mt;
    for (int t : mesh.omega_triangles) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double v = local_mass(area, i, j);
                const int r = ops.interior_index[tri[i]];
                const int c = col[tri[j]];
                if (c < 0) continue;
                if (r >= 0) et.emplace_back(r, c, v);
                if (col[tri[i]] >= 0) mt.emplace_back(col[tri[i]], c, v);
            }
    }
    map.E.resize(ops.num_dofs(), nc);
    map.E.setFromTriplets(et.begin(), et.end());
    map.Mc.resize(nc, nc);
    map.Mc.setFromTriplets(mt.begin(), mt.end());
    map.diagonal_mass = false;
    if (nc == 0) throw ConfigError("control region has no control nodes");
    finalize_map(map);
    return map;
}

ControlMap make_cellwise_control_map(const FemOperators& ops) {
    const Mesh2D& mesh = *ops.mesh;
    ControlMap map;
    map.layout = ControlMap::Layout::OmegaCells;
    map.entities = mesh.omega_triangles;
    const int nc = static_cast<int>(map.entities.size());
    if (nc == 0) throw ConfigError("control region is empty");
    std::vector<Triplet> et, mt;
    for (int c = 0; c < nc; ++c) {
        const int t = map.entities[c];
        const double area = mesh.triangle_area(t);
        for (int v : mesh.triangles[t]) {
            const int r = ops.interior_index[v];
            if (r >= 0) et.emplace_back(r, c, area / 3.0);
        }
        mt.emplace_back(c, c, area);
    }
    map.E.resize(ops.num_dofs(), nc);
    map.E.setFromTriplets(et.begin(), et.end());
    map.Mc.resize(nc, nc);
    map.Mc.setFromTriplets(mt.begin(), mt.end());
    map.diagonal_mass = true;
    finalize_map(map);
    return map;
}

ControlMap make_parameter_control_map(const FemOperators& ops, const std::vector<Rect>& forms) {
    const Mesh2D& mesh = *ops.mesh;
    if (forms.empty()) throw ConfigError("parameter control needs at least one form function");
    check_grid_aligned(forms, mesh.n_per_side);
    ControlMap map;
    map.layout = ControlMap::Layout::Parameter;
    const int nc = static_cast<int>(forms.size());
    std::vector<Triplet> et, mt;
    for (int c = 0; c < nc; ++c) {
        map.entities.push_back(c);
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
            if (!forms[c].contains(mesh.centroid(t))) continue;
            const double area = mesh.triangle_area(t);
            for (int v : mesh.triangles[t]) {
                const int r = ops.interior_index[v];
                if (r >= 0) et.emplace_back(r, c, area / 3.0);
            }
        }
        mt.emplace_back(c, c, 1.0);
    }
    map.E.resize(ops.num_dofs(), nc);
    map.E.setFromTriplets(et.begin(), et.end());
    map.Mc.resize(nc, nc);
    map.Mc.setFromTriplets(mt.begin(), mt.end());
    map.diagonal_mass = true;
    finalize_map(map);
    return map;
}

std::pair<int, std::array<double, 3>> locate(const Mesh2D& mesh, const Point& p) {
    const int n = mesh.n_per_side;
    const int i = std::clamp(static_cast<int>(std::floor(p.x * n)), 0, n - 1);
    const int j = std::clamp(static_cast<int>(std::floor(p.y * n)), 0, n - 1);
    const double lx = p.x * n - i, ly = p.y * n - j;
    // Lower triangle (i,j),(i+1,j),(i+1,j+1); upper (i,j),(i+1,j+1),(i,j+1).
    if (lx >= ly) return {2 * (j * n + i), {1.0 - lx, lx - ly, ly}};
    return {2 * (j * n + i) + 1, {1.0 - ly, lx, ly - lx}};
}

double evaluate_p1(const Mesh2D& mesh, const Vec& u_full, const Point& p) {
    const auto [t, l] = locate(mesh, p);
    const auto& tri = mesh.triangles[t];
    return l[0] * u_full[tri[0]] + l[1] * u_full[tri[1]] + l[2] * u_full[tri[2]];
}

Vec prolongate(const FemOperators& coarse, const FemOperators& fine, const Vec& u) {
    if (fine.mesh->n_per_side % coarse.mesh->n_per_side != 0) throw ConfigError("meshes are not nested");
    const Vec full = coarse.extend(u);
    Vec out(fine.num_dofs());
    for (int d = 0; d < fine.num_dofs(); ++d)
        out[d] = evaluate_p1(*coarse.mesh, full, fine.mesh->nodes[fine.interior_nodes[d]]);
    return out;
}

}  // namespace heatopt
