#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "heatopt/mesh.hpp"

namespace heatopt {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Cholesky = Eigen::SimplicialLLT<SpMat>;
using ScalarField = std::function<double(const Point&)>;

/// Linear map from control coefficients to interior load vectors,
/// together with the mass matrix of the control space.
///   apply_B(q)     = E q
///   apply_Bstar(z) = Mc^{-1} E^T z
struct ControlMap {
    enum class Layout { OmegaNodes, OmegaInteriorNodes, OmegaCells, Parameter };
    Layout layout = Layout::OmegaNodes;
    SpMat E;                   ///< interior dofs x control coefficients
    SpMat Mc;                  ///< control mass, SPD
    Vec mc_diag;               ///< diagonal of Mc
    bool diagonal_mass = false;
    std::vector<int> entities; ///< mesh node, triangle or form index per coefficient
    std::shared_ptr<Cholesky> mc_factor;

    int size() const { return static_cast<int>(E.cols()); }
    /// Solve Mc x = b, column by column.
    Mat mass_solve(const Mat& b) const;
    Mat mass_apply(const Mat& x) const;
};

enum class ControlKindFem { Distributed, Parameter };

/// Cache of sparse Cholesky factors of (M + s K), keyed by the scalar s = nu * k_m.
class FactorizationCache {
public:
    explicit FactorizationCache(std::size_t capacity = 6) : capacity_(capacity) {}
    std::shared_ptr<const Cholesky> get(const SpMat& M, const SpMat& K, double s);
    std::size_t factorizations() const { return count_; }

private:
    std::mutex mutex_;
    std::size_t capacity_;
    std::size_t count_ = 0;
    std::list<std::pair<double, std::shared_ptr<const Cholesky>>> entries_;
};

struct FemOperators {
    std::shared_ptr<const Mesh2D> mesh;
    double c_diff = 1.0;
    SpMat M_full, A_full;
    std::vector<int> interior_index;  ///< node -> dof, -1 on the boundary
    std::vector<int> interior_nodes;  ///< dof -> node
    SpMat M, A;
    SpMat K;  ///< c_diff * A
    ControlMap control_map;
    std::shared_ptr<Cholesky> mass_factor;
    std::shared_ptr<FactorizationCache> step_cache;

    int num_dofs() const { return static_cast<int>(interior_nodes.size()); }
    /// Cholesky factor of M + nu * k * K.
    std::shared_ptr<const Cholesky> step_factor(double nu, double k) const;
    /// Interior coefficients to full nodal vector (zero on the boundary).
    Vec extend(const Vec& u) const;
};

/// Assemble P1 mass and stiffness on all nodes, eliminate boundary nodes and
/// build the control map (distributed: P1 on the nodes of omega triangles;
/// parameter: indicator functions of the given rectangles).
FemOperators assemble(std::shared_ptr<const Mesh2D> mesh, double c_diff, ControlKindFem kind,
                      const std::vector<Rect>& form_specs = {});

/// Load vector b_i = int f phi_i over all nodes.
Vec load_vector_full(const Mesh2D& mesh, const ScalarField& f, int order = 4);

/// L2 projection onto V_h (P1, zero boundary values).
Vec l2_project(const FemOperators& ops, const ScalarField& f, int order = 4);

Vec apply_B(const ControlMap& map, const Vec& q);
Vec apply_Bstar(const ControlMap& map, const Vec& z);
inline Vec apply_B(const FemOperators& ops, const Vec& q) { return apply_B(ops.control_map, q); }
inline Vec apply_Bstar(const FemOperators& ops, const Vec& z) { return apply_Bstar(ops.control_map, z); }

/// (Delta_h u, z) = -(K u) . z
double pair_with_discrete_laplacian(const FemOperators& ops, const Vec& u, const Vec& z);

/// L2 norm of the difference between a V_h function and a field, by quadrature.
double l2_error(const FemOperators& ops, const Vec& u, const ScalarField& f, int order = 4);

/// Control maps for the supported control discretizations.
ControlMap make_nodal_control_map(const FemOperators& ops, bool include_boundary);
ControlMap make_cellwise_control_map(const FemOperators& ops);
ControlMap make_parameter_control_map(const FemOperators& ops, const std::vector<Rect>& forms);

/// Locate p: triangle index and barycentric coordinates.
std::pair<int, std::array<double, 3>> locate(const Mesh2D& mesh, const Point& p);

/// Value at p of the P1 function with nodal values u_full.
double evaluate_p1(const Mesh2D& mesh, const Vec& u_full, const Point& p);

/// Exact prolongation of a V_h function (interior coefficients) to a nested finer mesh.
Vec prolongate(const FemOperators& coarse, const FemOperators& fine, const Vec& u);

}  // namespace heatopt
