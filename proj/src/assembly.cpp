#include "hdiv_stokes/assembly.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "hdiv_stokes/condensation.hpp"

namespace hdiv_stokes {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(int rows, int cols, const Triplets& triplets)
{
    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

std::vector<int> visiting_order(int nt, std::span<const int> element_order)
{
    if (element_order.empty()) {
        std::vector<int> order(static_cast<std::size_t>(nt));
        std::iota(order.begin(), order.end(), 0);
        return order;
    }
    if (static_cast<int>(element_order.size()) != nt) {
        throw std::invalid_argument("element order must list every triangle once");
    }
    std::vector<int> order(element_order.begin(), element_order.end());
    std::vector<bool> hit(static_cast<std::size_t>(nt), false);
    for (int t : order) {
        if (t < 0 || t >= nt || hit[static_cast<std::size_t>(t)]) {
            throw std::invalid_argument("element order is not a permutation");
        }
        hit[static_cast<std::size_t>(t)] = true;
    }
    return order;
}

// Local P1c slot (2 i + c) -> global index or -1.
std::array<int, 6> p1_indices(const Mesh& mesh, const DofMap& dofs, int t)
{
    std::array<int, 6> idx{};
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
        const int d = dofs.vertex_dof[static_cast<std::size_t>(tri[i])];
        idx[2 * i] = d;
        idx[2 * i + 1] = d < 0 ? -1 : d + 1;
    }
    return idx;
}

std::array<int, 3> edge_indices(const Mesh& mesh, const DofMap& dofs, int t)
{
    std::array<int, 3> idx{};
    for (int k = 0; k < 3; ++k) {
        idx[k] = dofs.edge_dof[static_cast<std::size_t>(mesh.tri_edges()[t][k].edge)];
    }
    return idx;
}

std::array<int, 3> edge_signs(const Mesh& mesh, int t)
{
    const auto& te = mesh.tri_edges()[static_cast<std::size_t>(t)];
    return {te[0].sign, te[1].sign, te[2].sign};
}

}  // namespace

std::string_view to_string(Scheme scheme)
{
    switch (scheme) {
    case Scheme::Full: return "full";
    case Scheme::Perturbed: return "perturbed";
    case Scheme::BernardiRaugel: return "bernardi-raugel";
    }
    return "unknown";
}

std::string_view to_string(StabKind kind)
{
    return kind == StabKind::J0 ? "j0" : "jd";
}

void StabConfig::validate(const Mesh& mesh) const
{
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("stabilization parameter must be positive, got " + std::to_string(alpha));
    }
    if (!alpha_element.empty() && static_cast<int>(alpha_element.size()) != mesh.num_triangles()) {
        throw std::invalid_argument("per-element alpha needs one value per triangle");
    }
    if (!alpha_edge.empty() && static_cast<int>(alpha_edge.size()) != mesh.num_edges()) {
        throw std::invalid_argument("per-edge alpha needs one value per edge");
    }
    for (double a : alpha_element) {
        if (!(a > 0.0)) {
            throw std::invalid_argument("per-element alpha must be positive");
        }
    }
    for (double a : alpha_edge) {
        if (!(a > 0.0)) {
            throw std::invalid_argument("per-edge alpha must be positive");
        }
    }
}

DofMap build_dofmap(const Mesh& mesh)
{
    DofMap dofs;
    dofs.vertex_dof.assign(static_cast<std::size_t>(mesh.num_vertices()), -1);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.vertex_boundary()[v]) {
            dofs.vertex_dof[v] = dofs.n1;
            dofs.n1 += 2;
        }
    }
    dofs.edge_dof.assign(static_cast<std::size_t>(mesh.num_edges()), -1);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (!mesh.edge_boundary()[e]) {
            dofs.edge_dof[e] = dofs.nR++;
        }
    }
    dofs.nP = mesh.num_triangles();
    return dofs;
}

SparseMatrix assemble_stab(const Mesh& mesh, const DofMap& dofs, const StabConfig& stab)
{
    stab.validate(mesh);
    const QuadratureRule rule = quadrature(2);
    Triplets trip;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const TriangleGeometry tri = triangle_geometry(mesh.triangle_points(t));
        const LocalMatrices lm = local_matrices(tri, edge_signs(mesh, t), rule);
        const auto idx = edge_indices(mesh, dofs, t);
        if (stab.kind == StabKind::J0) {
            const double h = mesh.diameters()[t];
            const double w = stab.element_alpha(t) / (h * h);
            for (int k = 0; k < 3; ++k) {
                for (int l = 0; l < 3; ++l) {
                    if (idx[k] >= 0 && idx[l] >= 0) {
                        trip.emplace_back(idx[k], idx[l], w * lm.m_RR(k, l));
                    }
                }
            }
        } else {
            for (int k = 0; k < 3; ++k) {
                if (idx[k] < 0) {
                    continue;
                }
                const int e = mesh.tri_edges()[t][k].edge;
                const double he = mesh.edge_lengths()[e];
                trip.emplace_back(idx[k], idx[k], stab.edge_alpha(e) / (he * he) * lm.m_RR(k, k));
            }
        }
    }
    return from_triplets(dofs.nR, dofs.nR, trip);
}

BlockSystem assemble_system(const Mesh& mesh, const DofMap& dofs, const std::optional<StabConfig>& stab,
                            double nu, const VectorField& f, Scheme scheme,
                            std::span<const int> element_order)
{
    if (scheme == Scheme::BernardiRaugel && stab) {
        throw std::invalid_argument("the Bernardi-Raugel scheme takes no RT0 stabilization");
    }
    if (scheme != Scheme::BernardiRaugel && !stab) {
        throw std::invalid_argument("scheme '" + std::string(to_string(scheme)) + "' needs a stabilization");
    }
    if (scheme == Scheme::Perturbed && stab->kind != StabKind::JD) {
        throw std::invalid_argument("the diagonally perturbed scheme is defined with the JD stabilization");
    }
    if (!(nu > 0.0)) {
        throw std::invalid_argument("viscosity must be positive");
    }
    if (stab) {
        stab->validate(mesh);
    }

    const QuadratureRule mass_rule = quadrature(2);
    const QuadratureRule load_rule = quadrature(kLoadQuadratureExactness);
    const bool bubbles = scheme == Scheme::BernardiRaugel;

    BlockSystem sys;
    sys.nu = nu;
    sys.scheme = scheme;
    sys.F_L = Vector::Zero(dofs.n1);
    sys.F_R = Vector::Zero(dofs.nR);
    sys.c = Vector(dofs.nP);

    Triplets tLL;
    Triplets tRL;
    Triplets tRR;
    Triplets tGL;
    Triplets tGR;

    for (int t : visiting_order(mesh.num_triangles(), element_order)) {
        const TriangleGeometry tri = triangle_geometry(mesh.triangle_points(t));
        const auto signs = edge_signs(mesh, t);
        const auto li = p1_indices(mesh, dofs, t);
        const auto ri = edge_indices(mesh, dofs, t);
        sys.c(t) = tri.area;

        const LocalMatrices lm = local_matrices(tri, signs, mass_rule);
        Eigen::Matrix<double, 3, 6> a_RL = lm.a_RL;
        Eigen::Matrix3d a_RR = lm.a_RR;
        Eigen::Matrix<double, 1, 3> g_R = lm.g_R;
        std::array<Point, 3> normals;
        for (int k = 0; k < 3; ++k) {
            normals[k] = mesh.edge_normals()[mesh.tri_edges()[t][k].edge];
        }
        if (bubbles) {
            const BubbleBlocks bb = br_bubble_blocks(tri, normals, mass_rule);
            a_RL = bb.a_BL;
            a_RR = bb.a_BB;
            g_R = bb.g_B;
        } else if (stab->kind == StabKind::J0) {
            const double h = mesh.diameters()[t];
            a_RR += stab->element_alpha(t) / (h * h) * lm.m_RR;
        }

        for (int a = 0; a < 6; ++a) {
            if (li[a] < 0) {
                continue;
            }
            for (int b = 0; b < 6; ++b) {
                if (li[b] >= 0 && lm.a_LL(a, b) != 0.0) {
                    tLL.emplace_back(li[a], li[b], nu * lm.a_LL(a, b));
                }
            }
            tGL.emplace_back(li[a], t, lm.g_L(a));
        }
        for (int k = 0; k < 3; ++k) {
            if (ri[k] < 0) {
                continue;
            }
            for (int b = 0; b < 6; ++b) {
                if (li[b] >= 0) {
                    tRL.emplace_back(ri[k], li[b], nu * a_RL(k, b));
                }
            }
            // The perturbed scheme replaces the whole RR block by D_RR below.
            if (scheme != Scheme::Perturbed) {
                for (int l = 0; l < 3; ++l) {
                    if (ri[l] >= 0) {
                        tRR.emplace_back(ri[k], ri[l], nu * a_RR(k, l));
                    }
                }
            }
            tGR.emplace_back(ri[k], t, g_R(k));
        }

        for (std::size_t q = 0; q < load_rule.size(); ++q) {
            const auto& bary = load_rule.points[q];
            const Point x = tri.map(bary);
            const Point fx = f(x);
            const double w = 2.0 * tri.area * load_rule.weights[q];
            for (int i = 0; i < 3; ++i) {
                if (li[2 * i] >= 0) {
                    sys.F_L(li[2 * i]) += w * fx.x() * bary[i];
                    sys.F_L(li[2 * i + 1]) += w * fx.y() * bary[i];
                }
            }
            for (int k = 0; k < 3; ++k) {
                if (ri[k] < 0) {
                    continue;
                }
                if (bubbles) {
                    sys.F_R(ri[k]) += w * bubble_value(bary, k) * fx.dot(normals[k]);
                } else {
                    sys.F_R(ri[k]) += w * fx.dot(rt0_basis(tri, k, signs[k])(x));
                }
            }
        }
    }

    if (stab && stab->kind == StabKind::JD && scheme == Scheme::Full) {
        const SparseMatrix jd = assemble_stab(mesh, dofs, *stab);
        for (int k = 0; k < jd.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(jd, k); it; ++it) {
                tRR.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), nu * it.value());
            }
        }
    }

    sys.A_LL = from_triplets(dofs.n1, dofs.n1, tLL);
    sys.A_RL = from_triplets(dofs.nR, dofs.n1, tRL);
    sys.G_L = from_triplets(dofs.n1, dofs.nP, tGL);
    sys.G_R = from_triplets(dofs.nR, dofs.nP, tGR);
    if (scheme == Scheme::Perturbed) {
        const Vector d = build_drr(mesh, dofs, *stab, nu);
        Triplets td;
        for (int e = 0; e < dofs.nR; ++e) {
            td.emplace_back(e, e, d(e));
        }
        sys.A_RR = from_triplets(dofs.nR, dofs.nR, td);
    } else {
        sys.A_RR = from_triplets(dofs.nR, dofs.nR, tRR);
    }
    return sys;
}

}  // namespace hdiv_stokes
