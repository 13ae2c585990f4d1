#pragma once

#include "hdiv_stokes/assembly.hpp"
#include "hdiv_stokes/saddle_solver.hpp"

namespace hdiv_stokes {

/// Diagonal of D_RR: nu [3 (grad Phi_e, grad Phi_e) + alpha_e h_e^-2 (Phi_e, Phi_e)],
/// both integrals over the two triangles sharing e. Requires the JD kind.
Vector build_drr(const Mesh& mesh, const DofMap& dofs, const StabConfig& stab, double nu);

/// Schur complement of the perturbed system after eliminating the RT0 unknowns.
/// Stored with the block names of the uncondensed system:
///   A_hat   = A_LL - A_RL^T D^-1 A_RL
///   G_hat   = G_L  - A_RL^T D^-1 G_R
///   C_PP    = -G_R^T D^-1 G_R
///   F_hat_L = F_L  - A_RL^T D^-1 F_R
///   F_hat_P = -G_R^T D^-1 F_R
/// The original D_RR, A_RL, G_R and F_R are kept for recovery.
struct CondensedSystem {
    SparseMatrix A_hat;
    SparseMatrix G_hat;
    SparseMatrix C_PP;
    Vector F_hat_L;
    Vector F_hat_P;
    Vector D_RR;
    SparseMatrix A_RL;
    SparseMatrix G_R;
    Vector F_R;
    Vector c;

    [[nodiscard]] int n1() const { return static_cast<int>(F_hat_L.size()); }
    [[nodiscard]] int nP() const { return static_cast<int>(F_hat_P.size()); }
    /// U_L, P and the mean multiplier.
    [[nodiscard]] int size() const { return n1() + nP() + 1; }
};

/// `sys` must be the perturbed scheme (diagonal A_RR). Throws on a
/// non-diagonal or non-positive D_RR.
CondensedSystem condense(const BlockSystem& sys);

/// Bordered matrix and right-hand side of the condensed system in the
/// ordering [U_L; P; lambda], with the same coupling sign as to_global.
GlobalSystem condensed_global(const CondensedSystem& cs);

/// U_R = D_RR^-1 (F_R - A_RL U_L + G_R P), edge by edge.
Vector recover_rt0(const CondensedSystem& cs, const Vector& U_L, const Vector& P);

/// Condense, solve for (U_L, P), then recover U_R. The reported residual is
/// the one of the full perturbed system.
Solution solve_condensed(const BlockSystem& sys);

}  // namespace hdiv_stokes
