#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "hdiv_stokes/mesh.hpp"

namespace hdiv_stokes {

/// Rule on the reference triangle (0,0), (1,0), (0,1). Points are barycentric
/// coordinates; weights sum to the reference area 1/2.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int exactness = 0;

    [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre rule on [0, 1].
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
};

inline constexpr int kMaxQuadratureExactness = 14;
/// Exactness used for every load and error integral.
inline constexpr int kLoadQuadratureExactness = 12;

/// Collapsed-square Gauss rule exact for polynomials of total degree
/// `exactness`. Throws std::invalid_argument outside [1, 14].
QuadratureRule quadrature(int exactness);
LineRule gauss_legendre(int npoints);

/// Affine triangle with cached barycentric gradients.
struct TriangleGeometry {
    std::array<Point, 3> p;
    double area = 0.0;
    std::array<Point, 3> grad_lambda;
    std::array<double, 3> edge_length;  ///< length of the edge opposite vertex i

    [[nodiscard]] Point map(const std::array<double, 3>& bary) const
    {
        return bary[0] * p[0] + bary[1] * p[1] + bary[2] * p[2];
    }
};

/// Throws std::invalid_argument for degenerate or clockwise triangles.
TriangleGeometry triangle_geometry(const std::array<Point, 3>& p);

/// Lowest-order Raviart-Thomas basis restricted to one triangle:
/// Phi(x) = scale * (x - origin), normalised so Phi . n_e == 1 on its edge.
struct RT0Basis {
    double scale = 0.0;
    Point origin;
    double divergence = 0.0;  ///< 2 * scale

    [[nodiscard]] Point operator()(const Point& x) const { return scale * (x - origin); }
};

RT0Basis rt0_basis(const TriangleGeometry& tri, int local_edge, int sign);

/// Element blocks in local ordering: P1c dofs are (v0x, v0y, v1x, v1y, v2x, v2y),
/// RT0 dofs follow the local edge order.
struct LocalMatrices {
    Eigen::Matrix<double, 6, 6> a_LL;
    Eigen::Matrix<double, 3, 6> a_RL;
    Eigen::Matrix3d a_RR;
    Eigen::Matrix3d m_RR;
    Eigen::Matrix<double, 1, 6> g_L;
    Eigen::Matrix<double, 1, 3> g_R;
};

/// Gradient blocks involving RT0 use (grad w, grad Phi)_T = 1/2 (div w, div Phi)_T,
/// which is exact because grad Phi = (div Phi / 2) I. The mass block uses `rule`.
LocalMatrices local_matrices(const TriangleGeometry& tri, const std::array<int, 3>& signs,
                             const QuadratureRule& rule);

/// Bernardi-Raugel edge bubble b_e n_e with b_e = 4 lambda_i lambda_j on the
/// endpoints of the local edge, so b_e = 1 at the edge midpoint.
struct BubbleRow {
    Eigen::Matrix<double, 1, 6> coupling;  ///< (grad(b n), grad phi_k)_T for P1c basis phi_k
    double self_energy = 0.0;              ///< (grad(b n), grad(b n))_T
    double divergence = 0.0;               ///< (div(b n), 1)_T
};

[[nodiscard]] double bubble_value(const std::array<double, 3>& bary, int local_edge);
[[nodiscard]] Point bubble_gradient(const TriangleGeometry& tri, const std::array<double, 3>& bary,
                                    int local_edge);

BubbleRow br_bubble(const TriangleGeometry& tri, int local_edge, const Point& normal,
                    const QuadratureRule& rule);

/// All bubble blocks of one triangle, including bubble-bubble coupling.
struct BubbleBlocks {
    Eigen::Matrix<double, 3, 6> a_BL;
    Eigen::Matrix3d a_BB;
    Eigen::Matrix<double, 1, 3> g_B;
};

BubbleBlocks br_bubble_blocks(const TriangleGeometry& tri, const std::array<Point, 3>& normals,
                              const QuadratureRule& rule);

}  // namespace hdiv_stokes
