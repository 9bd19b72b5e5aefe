#include "heatopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace heatopt {

std::string Rect::to_string() const {
    std::ostringstream os;
    os << "(" << x0 << "," << x1 << ")x(" << y0 << "," << y1 << ")";
    return os.str();
}

double Mesh2D::triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    const Point& a = nodes[tri[0]];
    const Point& b = nodes[tri[1]];
    const Point& c = nodes[tri[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Point Mesh2D::centroid(std::size_t t) const {
    const auto& tri = triangles[t];
    Point p;
    for (int v : tri) {
        p.x += nodes[v].x / 3.0;
        p.y += nodes[v].y / 3.0;
    }
    return p;
}

double Mesh2D::omega_area() const {
    double a = 0.0;
    for (int t : omega_triangles) a += triangle_area(t);
    return a;
}

namespace {

bool on_grid(double v, int n) {
    const double s = v * n;
    return std::abs(s - std::round(s)) < 1e-10 && v >= -1e-14 && v <= 1.0 + 1e-14;
}

}  // namespace

void check_grid_aligned(const std::vector<Rect>& omega, int n) {
    for (const Rect& r : omega) {
        if (!(r.x0 < r.x1 && r.y0 < r.y1))
            throw ConfigError("empty or inverted control rectangle " + r.to_string());
        if (!on_grid(r.x0, n) || !on_grid(r.x1, n) || !on_grid(r.y0, n) || !on_grid(r.y1, n))
            throw ConfigError("control rectangle " + r.to_string() + " is not aligned with a " +
                              std::to_string(n) + "x" + std::to_string(n) + " grid");
    }
}

namespace {

void tag_omega(Mesh2D& mesh) {
    mesh.omega_triangles.clear();
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Point c = mesh.centroid(t);
        for (const Rect& r : mesh.omega) {
            if (r.contains(c)) {
                mesh.omega_triangles.push_back(static_cast<int>(t));
                break;
            }
        }
    }
}

void mark_boundary(Mesh2D& mesh) {
    mesh.boundary_nodes.clear();
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Point& p = mesh.nodes[i];
        if (p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0)
            mesh.boundary_nodes.push_back(static_cast<int>(i));
    }
}

/// Rotate each triangle so its smallest node comes first, then sort.
void canonicalize_triangles(Mesh2D& mesh) {
    for (auto& tri : mesh.triangles) {
        const auto it = std::min_element(tri.begin(), tri.end());
        std::rotate(tri.begin(), it, tri.end());
    }
    std::sort(mesh.triangles.begin(), mesh.triangles.end());
}

}  // namespace

Mesh2D build_structured_mesh(int n, const std::vector<Rect>& omega_rects) {
    if (n < 1) throw ConfigError("n_per_side must be positive");
    check_grid_aligned(omega_rects, n);
    Mesh2D mesh;
    mesh.n_per_side = n;
    mesh.omega = omega_rects;
    mesh.nodes.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            mesh.nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int a = mesh.node_at(i, j), b = mesh.node_at(i + 1, j);
            const int c = mesh.node_at(i + 1, j + 1), d = mesh.node_at(i, j + 1);
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
        }
    }
    canonicalize_triangles(mesh);
    mark_boundary(mesh);
    tag_omega(mesh);
    return mesh;
}

Mesh2D refine_uniform(const Mesh2D& mesh) {
    // Collect coarse nodes and edge midpoints, keyed by doubled grid coordinates.
    const int n = mesh.n_per_side;
    const int nf = 2 * n;
    auto key = [nf](const Point& p) {
        const long ix = std::lround(p.x * nf), iy = std::lround(p.y * nf);
        return std::pair<long, long>(iy, ix);
    };
    std::map<std::pair<long, long>, int> index;
    std::vector<Point> pts = mesh.nodes;
    std::vector<std::array<int, 3>> tris;
    tris.reserve(4 * mesh.triangles.size());
    for (std::size_t i = 0; i < pts.size(); ++i) index.emplace(key(pts[i]), static_cast<int>(i));
    auto midpoint = [&](int a, int b) {
        const Point p{0.5 * (pts[a].x + pts[b].x), 0.5 * (pts[a].y + pts[b].y)};
        auto [it, inserted] = index.emplace(key(p), static_cast<int>(pts.size()));
        if (inserted) pts.push_back(p);
        return it->second;
    };
    for (const auto& t : mesh.triangles) {
        const int ab = midpoint(t[0], t[1]);
        const int bc = midpoint(t[1], t[2]);
        const int ca = midpoint(t[2], t[0]);
        tris.push_back({t[0], ab, ca});
        tris.push_back({ab, t[1], bc});
        tris.push_back({ca, bc, t[2]});
        tris.push_back({ab, bc, ca});
    }
    // Renumber lexicographically by (y, x); the map is already in that order.
    std::vector<int> perm(pts.size());
    Mesh2D fine;
    fine.nodes.reserve(pts.size());
    for (const auto& [k, old] : index) {
        perm[old] = static_cast<int>(fine.nodes.size());
        fine.nodes.push_back({static_cast<double>(k.second) / nf, static_cast<double>(k.first) / nf});
    }
    fine.triangles.reserve(tris.size());
    for (const auto& t : tris) fine.triangles.push_back({perm[t[0]], perm[t[1]], perm[t[2]]});
    fine.n_per_side = nf;
    fine.level = mesh.level + 1;
    fine.omega = mesh.omega;
    canonicalize_triangles(fine);
    mark_boundary(fine);
    tag_omega(fine);
    return fine;
}

std::vector<int> coarse_to_fine_nodes(const Mesh2D& coarse, const Mesh2D& fine) {
    const int n = coarse.n_per_side;
    if (fine.n_per_side % n != 0) throw ConfigError("meshes are not nested");
    const int r = fine.n_per_side / n;
    std::vector<int> map(fine.num_nodes(), -1);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) map[fine.node_at(r * i, r * j)] = coarse.node_at(i, j);
    return map;
}

std::vector<int> fine_triangle_parents(const Mesh2D& coarse, const Mesh2D& fine) {
    const int n = coarse.n_per_side;
    if (fine.n_per_side % n != 0) throw ConfigError("meshes are not nested");
    // Coarse triangles come in (lower, upper) pairs per square, squares ordered by (j, i).
    std::vector<int> parent(fine.num_triangles());
    for (std::size_t t = 0; t < fine.num_triangles(); ++t) {
        const Point c = fine.centroid(t);
        const int i = std::min(n - 1, static_cast<int>(std::floor(c.x * n)));
        const int j = std::min(n - 1, static_cast<int>(std::floor(c.y * n)));
        const double lx = c.x * n - i, ly = c.y * n - j;
        parent[t] = 2 * (j * n + i) + (lx > ly ? 0 : 1);
    }
    return parent;
}

TimeGrid build_time_grid(int M) {
    if (M < 1) throw ConfigError("time grid needs M >= 1");
    TimeGrid g;
    g.t.resize(M + 1);
    g.k.assign(M, 1.0 / M);
    for (int m = 0; m <= M; ++m) g.t[m] = static_cast<double>(m) / M;
    return g;
}

int time_refinement_ratio(const TimeGrid& coarse, const TimeGrid& fine) {
    if (coarse.M() < 1 || fine.M() % coarse.M() != 0)
        throw ConfigError("time grids are not nested");
    const int r = fine.M() / coarse.M();
    for (int m = 0; m <= coarse.M(); ++m)
        if (std::abs(coarse.t[m] - fine.t[r * m]) > 1e-14) throw ConfigError("time grids are not nested");
    return r;
}

}  // namespace heatopt
