#pragma once

#include <array>
#include <vector>

namespace heatopt {

/// Quadrature rule on the reference triangle in barycentric coordinates.
/// Weights sum to 1, so integrals are area * sum(w * f).
struct TriangleRule {
    std::vector<std::array<double, 3>> bary;
    std::vector<double> weights;
};

/// Symmetric rules exact for polynomials of degree 1, 2 or 4.
const TriangleRule& triangle_rule(int order);

/// Gauss-Legendre nodes and weights on (0, 1) with n points (1 <= n <= 5).
struct LineRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const LineRule& gauss_legendre01(int n);

}  // namespace heatopt
