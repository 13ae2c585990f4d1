#pragma once

#include "hdiv_stokes/assembly.hpp"

namespace hdiv_stokes {

/// Number of Gauss points used for edge integrals.
inline constexpr int kEdgeGaussPoints = 5;

/// Elementwise L2 projection onto P0 (element means).
Vector project_p0(const Mesh& mesh, const ScalarField& q);

/// Mean normal flux density (1/h_e) int_e v . n_e ds on every mesh edge.
Vector edge_fluxes(const Mesh& mesh, const VectorField& v);

/// RT0 interpolant coefficients on the interior edges (DofMap ordering).
Vector interp_rt0(const Mesh& mesh, const DofMap& dofs, const VectorField& v);

/// Nodal P1c interpolant; boundary vertices carry no coefficients.
Vector interp_p1(const Mesh& mesh, const DofMap& dofs, const VectorField& v);

struct FortinInterpolant {
    Vector U_L;
    Vector U_R;
};

/// Pi_h v = Pi_h^1 v + Pi_h^R (v - Pi_h^1 v) for v vanishing on the boundary.
FortinInterpolant fortin(const Mesh& mesh, const DofMap& dofs, const VectorField& v);

}  // namespace hdiv_stokes
