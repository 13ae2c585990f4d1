#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hdiv_stokes/fe_spaces.hpp"
#include "hdiv_stokes/mesh.hpp"

namespace hdiv_stokes {

/// Compressed-row sparse matrix; rows have sorted, unique column indices.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using VectorField = std::function<Point(const Point&)>;
using ScalarField = std::function<double(const Point&)>;

/// Global numbering with homogeneous Dirichlet data removed: boundary vertices
/// and boundary edges carry no unknowns.
struct DofMap {
    std::vector<int> vertex_dof;  ///< x-velocity index per vertex (y is x + 1), or -1
    std::vector<int> edge_dof;    ///< RT0 (or bubble) index per edge, or -1
    int n1 = 0;                   ///< P1c unknowns
    int nR = 0;                   ///< RT0 unknowns
    int nP = 0;                   ///< P0 pressure unknowns
};

DofMap build_dofmap(const Mesh& mesh);

enum class StabKind { J0, JD };

/// Penalty on the RT0 component. Per-element / per-edge overrides, when
/// non-empty, must have one entry per triangle / per mesh edge.
struct StabConfig {
    StabKind kind = StabKind::JD;
    double alpha = 1.0;
    std::vector<double> alpha_element;
    std::vector<double> alpha_edge;

    [[nodiscard]] double element_alpha(int t) const
    {
        return alpha_element.empty() ? alpha : alpha_element[static_cast<std::size_t>(t)];
    }
    [[nodiscard]] double edge_alpha(int e) const
    {
        return alpha_edge.empty() ? alpha : alpha_edge[static_cast<std::size_t>(e)];
    }
    /// Throws std::invalid_argument on non-positive parameters or size mismatch.
    void validate(const Mesh& mesh) const;
};

enum class Scheme { Full, Perturbed, BernardiRaugel };

std::string_view to_string(Scheme scheme);
std::string_view to_string(StabKind kind);

/// Blocks of the Stokes saddle-point system. A-blocks carry the viscosity,
/// G-blocks hold b(v, q) = (div v, q) without it. For the perturbed scheme
/// A_RR is the diagonal D_RR; for Bernardi-Raugel the "R" slots hold the
/// edge bubbles.
struct BlockSystem {
    SparseMatrix A_LL;  ///< n1 x n1
    SparseMatrix A_RL;  ///< nR x n1
    SparseMatrix A_RR;  ///< nR x nR
    SparseMatrix G_L;   ///< n1 x nP
    SparseMatrix G_R;   ///< nR x nP
    Vector F_L;
    Vector F_R;
    Vector c;           ///< element areas, for the zero-mean pressure constraint
    double nu = 1.0;
    Scheme scheme = Scheme::Full;

    [[nodiscard]] int n1() const { return static_cast<int>(F_L.size()); }
    [[nodiscard]] int nR() const { return static_cast<int>(F_R.size()); }
    [[nodiscard]] int nP() const { return static_cast<int>(c.size()); }
};

/// Stabilization matrix (nR x nR) without viscosity.
SparseMatrix assemble_stab(const Mesh& mesh, const DofMap& dofs, const StabConfig& stab);

/// `stab` must be set for Full/Perturbed (Perturbed requires JD) and empty for
/// Bernardi-Raugel. `element_order`, if non-empty, is the order in which the
/// element loop visits triangles.
BlockSystem assemble_system(const Mesh& mesh, const DofMap& dofs, const std::optional<StabConfig>& stab,
                            double nu, const VectorField& f, Scheme scheme,
                            std::span<const int> element_order = {});

}  // namespace hdiv_stokes
