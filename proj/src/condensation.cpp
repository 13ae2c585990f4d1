#include "hdiv_stokes/condensation.hpp"

#include <string>

namespace hdiv_stokes {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Space dimension enters the diagonal perturbation as (d + 1).
constexpr double kDimPlusOne = 3.0;

}  // namespace

Vector build_drr(const Mesh& mesh, const DofMap& dofs, const StabConfig& stab, double nu)
{
    if (stab.kind != StabKind::JD) {
        throw std::invalid_argument(
            "D_RR is defined with the diagonal stabilization JD; J0 cannot be used for the perturbed scheme");
    }
    stab.validate(mesh);
    const QuadratureRule rule = quadrature(2);
    Vector d = Vector::Zero(dofs.nR);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& te = mesh.tri_edges()[static_cast<std::size_t>(t)];
        const TriangleGeometry tri = triangle_geometry(mesh.triangle_points(t));
        const LocalMatrices lm = local_matrices(tri, {te[0].sign, te[1].sign, te[2].sign}, rule);
        for (int k = 0; k < 3; ++k) {
            const int r = dofs.edge_dof[static_cast<std::size_t>(te[k].edge)];
            if (r < 0) {
                continue;
            }
            const double he = mesh.edge_lengths()[te[k].edge];
            d(r) += nu * (kDimPlusOne * lm.a_RR(k, k) + stab.edge_alpha(te[k].edge) / (he * he) * lm.m_RR(k, k));
        }
    }
    return d;
}

CondensedSystem condense(const BlockSystem& sys)
{
    const int nR = sys.nR();
    if (sys.A_RR.rows() != nR || sys.A_RR.cols() != nR) {
        throw std::invalid_argument("A_RR has the wrong shape for condensation");
    }
    CondensedSystem cs;
    cs.D_RR = Vector::Zero(nR);
    for (int k = 0; k < sys.A_RR.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(sys.A_RR, k); it; ++it) {
            if (it.row() != it.col() && it.value() != 0.0) {
                throw std::invalid_argument("condensation needs a diagonal RT0 block");
            }
            if (it.row() == it.col()) {
                cs.D_RR(it.row()) = it.value();
            }
        }
    }
    for (int e = 0; e < nR; ++e) {
        if (!(cs.D_RR(e) > 0.0)) {
            throw std::invalid_argument("D_RR entry " + std::to_string(e) + " is not positive");
        }
    }

    const Vector dinv = cs.D_RR.cwiseInverse();
    const SparseMatrix scaled_RL = dinv.asDiagonal() * sys.A_RL;
    const SparseMatrix scaled_GR = dinv.asDiagonal() * sys.G_R;
    const SparseMatrix A_LR = sys.A_RL.transpose();
    const SparseMatrix G_RT = sys.G_R.transpose();

    cs.A_hat = (sys.A_LL - SparseMatrix(A_LR * scaled_RL)).pruned();
    cs.G_hat = (sys.G_L - SparseMatrix(A_LR * scaled_GR)).pruned();
    cs.C_PP = SparseMatrix(-(G_RT * scaled_GR)).pruned();
    const Vector dF = dinv.cwiseProduct(sys.F_R);
    cs.F_hat_L = sys.F_L - A_LR * dF;
    cs.F_hat_P = -(G_RT * dF);
    cs.A_RL = sys.A_RL;
    cs.G_R = sys.G_R;
    cs.F_R = sys.F_R;
    cs.c = sys.c;
    return cs;
}

GlobalSystem condensed_global(const CondensedSystem& cs)
{
    const int n1 = cs.n1();
    const int nP = cs.nP();
    Triplets trip;
    for (int k = 0; k < cs.A_hat.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(cs.A_hat, k); it; ++it) {
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    for (int k = 0; k < cs.G_hat.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(cs.G_hat, k); it; ++it) {
            const int r = static_cast<int>(it.row());
            const int c = n1 + static_cast<int>(it.col());
            trip.emplace_back(r, c, -it.value());
            trip.emplace_back(c, r, -it.value());
        }
    }
    for (int k = 0; k < cs.C_PP.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(cs.C_PP, k); it; ++it) {
            trip.emplace_back(n1 + static_cast<int>(it.row()), n1 + static_cast<int>(it.col()), it.value());
        }
    }
    for (int t = 0; t < nP; ++t) {
        trip.emplace_back(n1 + t, n1 + nP, cs.c(t));
        trip.emplace_back(n1 + nP, n1 + t, cs.c(t));
    }
    GlobalSystem g;
    g.nR = 0;
    g.n1 = n1;
    g.nP = nP;
    g.scheme = Scheme::Perturbed;
    g.matrix.resize(g.size(), g.size());
    g.matrix.setFromTriplets(trip.begin(), trip.end());
    g.matrix.makeCompressed();
    g.rhs = Vector::Zero(g.size());
    g.rhs.segment(0, n1) = cs.F_hat_L;
    g.rhs.segment(n1, nP) = -cs.F_hat_P;
    return g;
}

Vector recover_rt0(const CondensedSystem& cs, const Vector& U_L, const Vector& P)
{
    return (cs.F_R - cs.A_RL * U_L + cs.G_R * P).cwiseQuotient(cs.D_RR);
}

Solution solve_condensed(const BlockSystem& sys)
{
    const CondensedSystem cs = condense(sys);
    const int nR = static_cast<int>(cs.D_RR.size());
    const int n1 = cs.n1();
    const int nP = cs.nP();
    const BorderedLU lu(condensed_global(cs).matrix, n1, nP);

    // Eliminates U_R from a general right-hand side of the full perturbed
    // system, so refinement can run on that system rather than the condensed one.
    const auto apply = [&](const Vector& b) -> Vector {
        const Vector dR = b.segment(0, nR).cwiseQuotient(cs.D_RR);
        Vector rhs(n1 + nP + 1);
        rhs.segment(0, n1) = b.segment(nR, n1) - cs.A_RL.transpose() * dR;
        rhs.segment(n1, nP) = b.segment(nR + n1, nP) + cs.G_R.transpose() * dR;
        rhs(n1 + nP) = b(nR + n1 + nP);
        const Vector y = lu.solve(rhs);
        Vector x(nR + n1 + nP + 1);
        const Vector UL = y.segment(0, n1);
        const Vector P = y.segment(n1, nP);
        x.segment(0, nR) = (b.segment(0, nR) - cs.A_RL * UL + cs.G_R * P).cwiseQuotient(cs.D_RR);
        x.segment(nR, n1 + nP + 1) = y;
        return x;
    };

    const GlobalSystem full = to_global(sys);
    Solution s;
    s.scheme = Scheme::Perturbed;
    const Vector x = refined_solve(full.matrix, full.rhs, apply, &s.relative_residual);
    s.U_R = x.segment(0, nR);
    s.U_L = x.segment(nR, n1);
    s.P = x.segment(nR + n1, nP);
    s.multiplier = x(full.size() - 1);
    return s;
}

}  // namespace hdiv_stokes
