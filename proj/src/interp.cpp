#include "hdiv_stokes/interp.hpp"

namespace hdiv_stokes {

Vector project_p0(const Mesh& mesh, const ScalarField& q)
{
    const QuadratureRule rule = quadrature(kLoadQuadratureExactness);
    Vector out(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const TriangleGeometry tri = triangle_geometry(mesh.triangle_points(t));
        double sum = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            sum += 2.0 * rule.weights[k] * q(tri.map(rule.points[k]));
        }
        out(t) = sum;  // 2 |T| sum(w q) / |T|
    }
    return out;
}

Vector edge_fluxes(const Mesh& mesh, const VectorField& v)
{
    const LineRule g = gauss_legendre(kEdgeGaussPoints);
    Vector out(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Point& a = mesh.vertices()[mesh.edges()[e][0]];
        const Point& b = mesh.vertices()[mesh.edges()[e][1]];
        const Point& n = mesh.edge_normals()[e];
        double sum = 0.0;
        for (std::size_t k = 0; k < g.points.size(); ++k) {
            sum += g.weights[k] * v(a + g.points[k] * (b - a)).dot(n);
        }
        out(e) = sum;
    }
    return out;
}

Vector interp_rt0(const Mesh& mesh, const DofMap& dofs, const VectorField& v)
{
    const Vector flux = edge_fluxes(mesh, v);
    Vector out(dofs.nR);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (const int r = dofs.edge_dof[e]; r >= 0) {
            out(r) = flux(e);
        }
    }
    return out;
}

Vector interp_p1(const Mesh& mesh, const DofMap& dofs, const VectorField& v)
{
    Vector out(dofs.n1);
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        if (const int d = dofs.vertex_dof[i]; d >= 0) {
            const Point val = v(mesh.vertices()[i]);
            out(d) = val.x();
            out(d + 1) = val.y();
        }
    }
    return out;
}

FortinInterpolant fortin(const Mesh& mesh, const DofMap& dofs, const VectorField& v)
{
    FortinInterpolant pi;
    pi.U_L = interp_p1(mesh, dofs, v);
    const Vector& UL = pi.U_L;
    auto nodal = [&](int vertex) -> Point {
        const int d = dofs.vertex_dof[vertex];
        return d < 0 ? Point::Zero() : Point(UL(d), UL(d + 1));
    };

    // Pi_h^1 v is linear along each edge, so its normal flux is the endpoint average.
    const Vector flux = edge_fluxes(mesh, v);
    pi.U_R = Vector::Zero(dofs.nR);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const int r = dofs.edge_dof[e];
        if (r < 0) {
            continue;
        }
        const Point mean = 0.5 * (nodal(mesh.edges()[e][0]) + nodal(mesh.edges()[e][1]));
        pi.U_R(r) = flux(e) - mean.dot(mesh.edge_normals()[e]);
    }
    return pi;
}

}  // namespace hdiv_stokes
