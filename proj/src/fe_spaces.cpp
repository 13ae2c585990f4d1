#include "hdiv_stokes/fe_spaces.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hdiv_stokes {

LineRule gauss_legendre(int npoints)
{
    if (npoints < 1) {
        throw std::invalid_argument("Gauss-Legendre rule needs at least one point");
    }
    const auto n = static_cast<unsigned>(npoints);
    LineRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (unsigned i = 0; i < n; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double p = std::legendre(n, x);
            const double pm1 = n > 1 ? std::legendre(n - 1, x) : 1.0;
            dp = n * (x * p - pm1) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        {
            const double p = std::legendre(n, x);
            const double pm1 = n > 1 ? std::legendre(n - 1, x) : 1.0;
            dp = n * (x * p - pm1) / (x * x - 1.0);
        }
        // Map from [-1, 1] to [0, 1], ascending.
        rule.points[n - 1 - i] = 0.5 * (x + 1.0);
        rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

QuadratureRule quadrature(int exactness)
{
    if (exactness < 1 || exactness > kMaxQuadratureExactness) {
        throw std::invalid_argument("unsupported quadrature exactness " + std::to_string(exactness) +
                                    "; supported range is 1.." +
                                    std::to_string(kMaxQuadratureExactness));
    }
    // Duffy map x = s, y = (1 - s) t has Jacobian (1 - s), so the pulled-back
    // integrand has degree exactness + 1 in s and exactness in t.
    const int m = (exactness + 3) / 2;
    const LineRule g = gauss_legendre(m);
    QuadratureRule rule;
    rule.exactness = exactness;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double s = g.points[i];
            const double t = g.points[j];
            const double x = s;
            const double y = (1.0 - s) * t;
            rule.points.push_back({1.0 - x - y, x, y});
            rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - s));
        }
    }
    return rule;
}

TriangleGeometry triangle_geometry(const std::array<Point, 3>& p)
{
    TriangleGeometry tri;
    tri.p = p;
    const double twice_area =
        (p[1].x() - p[0].x()) * (p[2].y() - p[0].y()) - (p[2].x() - p[0].x()) * (p[1].y() - p[0].y());
    if (!(twice_area > 0.0)) {
        throw std::invalid_argument("degenerate or clockwise triangle");
    }
    tri.area = 0.5 * twice_area;
    for (int i = 0; i < 3; ++i) {
        const Point& a = p[(i + 1) % 3];
        const Point& b = p[(i + 2) % 3];
        // grad lambda_i is the inward normal of the opposite edge over the height.
        tri.grad_lambda[i] = Point(a.y() - b.y(), b.x() - a.x()) / twice_area;
        tri.edge_length[i] = (b - a).norm();
    }
    return tri;
}

RT0Basis rt0_basis(const TriangleGeometry& tri, int local_edge, int sign)
{
    if (!(tri.area > 0.0)) {
        throw std::invalid_argument("RT0 basis on a zero-area triangle");
    }
    RT0Basis phi;
    phi.scale = sign * tri.edge_length[local_edge] / (2.0 * tri.area);
    phi.origin = tri.p[local_edge];
    phi.divergence = 2.0 * phi.scale;
    return phi;
}

LocalMatrices local_matrices(const TriangleGeometry& tri, const std::array<int, 3>& signs,
                             const QuadratureRule& rule)
{
    LocalMatrices lm;
    std::array<RT0Basis, 3> phi;
    for (int k = 0; k < 3; ++k) {
        phi[k] = rt0_basis(tri, k, signs[k]);
    }

    lm.a_LL.setZero();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double g = tri.area * tri.grad_lambda[i].dot(tri.grad_lambda[j]);
            lm.a_LL(2 * i, 2 * j) = g;
            lm.a_LL(2 * i + 1, 2 * j + 1) = g;
        }
    }

    // div of phi_(j, c) = lambda_j e_c is d(lambda_j)/dx_c.
    for (int j = 0; j < 3; ++j) {
        for (int c = 0; c < 2; ++c) {
            const double div_w = tri.grad_lambda[j][c];
            lm.g_L(2 * j + c) = div_w * tri.area;
            for (int k = 0; k < 3; ++k) {
                lm.a_RL(k, 2 * j + c) = 0.5 * div_w * phi[k].divergence * tri.area;
            }
        }
    }

    lm.m_RR.setZero();
    for (int k = 0; k < 3; ++k) {
        lm.g_R(k) = phi[k].divergence * tri.area;
        for (int l = 0; l < 3; ++l) {
            lm.a_RR(k, l) = 0.5 * phi[k].divergence * phi[l].divergence * tri.area;
        }
    }
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point x = tri.map(rule.points[q]);
        const double w = 2.0 * tri.area * rule.weights[q];
        for (int k = 0; k < 3; ++k) {
            for (int l = k; l < 3; ++l) {
                lm.m_RR(k, l) += w * phi[k](x).dot(phi[l](x));
            }
        }
    }
    lm.m_RR.triangularView<Eigen::StrictlyLower>() = lm.m_RR.transpose();
    return lm;
}

double bubble_value(const std::array<double, 3>& bary, int local_edge)
{
    return 4.0 * bary[(local_edge + 1) % 3] * bary[(local_edge + 2) % 3];
}

Point bubble_gradient(const TriangleGeometry& tri, const std::array<double, 3>& bary, int local_edge)
{
    const int i = (local_edge + 1) % 3;
    const int j = (local_edge + 2) % 3;
    return 4.0 * (bary[j] * tri.grad_lambda[i] + bary[i] * tri.grad_lambda[j]);
}

BubbleRow br_bubble(const TriangleGeometry& tri, int local_edge, const Point& normal,
                    const QuadratureRule& rule)
{
    BubbleRow row;
    row.coupling.setZero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double w = 2.0 * tri.area * rule.weights[q];
        const Point gb = bubble_gradient(tri, rule.points[q], local_edge);
        for (int m = 0; m < 3; ++m) {
            const double gl = w * gb.dot(tri.grad_lambda[m]);
            row.coupling(2 * m) += normal.x() * gl;
            row.coupling(2 * m + 1) += normal.y() * gl;
        }
        row.self_energy += w * normal.squaredNorm() * gb.squaredNorm();
        row.divergence += w * normal.dot(gb);
    }
    return row;
}

BubbleBlocks br_bubble_blocks(const TriangleGeometry& tri, const std::array<Point, 3>& normals,
                              const QuadratureRule& rule)
{
    BubbleBlocks b;
    for (int k = 0; k < 3; ++k) {
        const BubbleRow row = br_bubble(tri, k, normals[k], rule);
        b.a_BL.row(k) = row.coupling;
        b.g_B(k) = row.divergence;
    }
    b.a_BB.setZero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double w = 2.0 * tri.area * rule.weights[q];
        std::array<Point, 3> gb;
        for (int k = 0; k < 3; ++k) {
            gb[k] = bubble_gradient(tri, rule.points[q], k);
        }
        for (int k = 0; k < 3; ++k) {
            for (int l = 0; l < 3; ++l) {
                b.a_BB(k, l) += w * normals[k].dot(normals[l]) * gb[k].dot(gb[l]);
            }
        }
    }
    return b;
}

}  // namespace hdiv_stokes
