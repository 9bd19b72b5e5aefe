#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace heatopt {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned rectangle (x0,x1) x (y0,y1).
struct Rect {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    double area() const { return (x1 - x0) * (y1 - y0); }
    bool contains(const Point& p) const { return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1; }
    std::string to_string() const;
};

/// Raised for inconsistent problem setup (bad rectangles, shape mismatches, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Triangulation of the unit square built from n x n squares, each cut along
/// the (i,j)-(i+1,j+1) diagonal. Nodes are ordered lexicographically by (y, x).
struct Mesh2D {
    std::vector<Point> nodes;
    std::vector<std::array<int, 3>> triangles;  ///< counter-clockwise
    std::vector<int> boundary_nodes;            ///< sorted
    std::vector<int> omega_triangles;           ///< sorted
    std::vector<Rect> omega;
    int n_per_side = 0;
    int level = 0;  ///< number of uniform refinements applied

    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_triangles() const { return triangles.size(); }
    double triangle_area(std::size_t t) const;
    Point centroid(std::size_t t) const;
    /// Node index of grid point (i, j), i along x.
    int node_at(int i, int j) const { return j * (n_per_side + 1) + i; }
    double omega_area() const;
};

/// Throws ConfigError unless every rectangle has corners on the n x n grid.
void check_grid_aligned(const std::vector<Rect>& rects, int n);

Mesh2D build_structured_mesh(int n_per_side, const std::vector<Rect>& omega_rects);

/// Red refinement: every triangle split into four through its edge midpoints.
/// The result is identical, node for node, to build_structured_mesh(2n, omega).
Mesh2D refine_uniform(const Mesh2D& mesh);

/// For each fine node, the index of the coarse node at the same location,
/// or -1 for new midpoint nodes. Requires fine.n_per_side == 2 * coarse.n_per_side.
std::vector<int> coarse_to_fine_nodes(const Mesh2D& coarse, const Mesh2D& fine);

/// Index of the coarse triangle containing each fine triangle.
std::vector<int> fine_triangle_parents(const Mesh2D& coarse, const Mesh2D& fine);

struct TimeGrid {
    std::vector<double> t;  ///< breakpoints t_0 = 0 < ... < t_M = 1
    std::vector<double> k;  ///< interval lengths k_m, m = 0..M-1

    int M() const { return static_cast<int>(k.size()); }
    bool operator==(const TimeGrid& o) const { return t == o.t; }
};

TimeGrid build_time_grid(int M);

/// fine.M() / coarse.M() for nested uniform grids; throws ConfigError otherwise.
int time_refinement_ratio(const TimeGrid& coarse, const TimeGrid& fine);

}  // namespace heatopt
