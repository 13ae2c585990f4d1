#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>
#include <Eigen/Dense>

#include "hdiv_stokes/assembly.hpp"
#include "test_support.hpp"

namespace hs = hdiv_stokes;
using hs::Point;
using hs::test::dense;

namespace {

const hs::VectorField kZeroForce = [](const Point&) { return Point(0.0, 0.0); };
const hs::VectorField kSmoothForce = [](const Point& x) {
    return Point(std::sin(3.0 * x.x()) + x.y(), std::cos(2.0 * x.y()) * x.x());
};

Eigen::MatrixXd velocity_block(const hs::BlockSystem& s)
{
    const int nR = s.nR();
    const int n1 = s.n1();
    Eigen::MatrixXd A(nR + n1, nR + n1);
    A.topLeftCorner(nR, nR) = dense(s.A_RR);
    A.topRightCorner(nR, n1) = dense(s.A_RL);
    A.bottomLeftCorner(n1, nR) = dense(s.A_RL).transpose();
    A.bottomRightCorner(n1, n1) = dense(s.A_LL);
    return A;
}

hs::StabConfig stab_of(hs::StabKind kind, double alpha = 1.0)
{
    hs::StabConfig s;
    s.kind = kind;
    s.alpha = alpha;
    return s;
}

}  // namespace

TEST(DofMap, CountsOnStructuredMeshes)
{
    const auto check = [](int n, int n1, int nR, int nP) {
        const hs::DofMap d = hs::build_dofmap(hs::generate_structured(n));
        EXPECT_EQ(d.n1, n1) << "n=" << n;
        EXPECT_EQ(d.nR, nR) << "n=" << n;
        EXPECT_EQ(d.nP, nP) << "n=" << n;
    };
    check(1, 0, 1, 2);
    check(2, 2, 8, 8);
    check(4, 18, 40, 32);
}

TEST(DofMap, BoundaryEntitiesCarryNoUnknowns)
{
    const hs::Mesh m = hs::generate_structured(4);
    const hs::DofMap d = hs::build_dofmap(m);
    for (int v = 0; v < m.num_vertices(); ++v) {
        EXPECT_EQ(d.vertex_dof[v] < 0, bool(m.vertex_boundary()[v]));
    }
    for (int e = 0; e < m.num_edges(); ++e) {
        EXPECT_EQ(d.edge_dof[e] < 0, bool(m.edge_boundary()[e]));
    }
}

TEST(Stabilization, DiagonalKindOnSingleCell)
{
    const hs::Mesh m = hs::generate_structured(1);
    const hs::SparseMatrix jd = hs::assemble_stab(m, hs::build_dofmap(m), stab_of(hs::StabKind::JD));
    ASSERT_EQ(jd.rows(), 1);
    EXPECT_NEAR(jd.coeff(0, 0), 1.0 / 3.0, 1e-14);
    const hs::SparseMatrix j0 = hs::assemble_stab(m, hs::build_dofmap(m), stab_of(hs::StabKind::J0));
    EXPECT_NEAR(j0.coeff(0, 0), 1.0 / 3.0, 1e-14);
}

TEST(Stabilization, DiagonalKindIsDiagonal)
{
    const hs::Mesh m = hs::generate_structured(4);
    const Eigen::MatrixXd jd = dense(hs::assemble_stab(m, hs::build_dofmap(m), stab_of(hs::StabKind::JD)));
    EXPECT_EQ((jd - Eigen::MatrixXd(jd.diagonal().asDiagonal())).norm(), 0.0);
    EXPECT_GT(jd.diagonal().minCoeff(), 0.0);
}

TEST(Stabilization, ElementKindIsElementLocal)
{
    const hs::Mesh m = hs::generate_structured(3);
    const hs::DofMap d = hs::build_dofmap(m);
    const Eigen::MatrixXd j0 = dense(hs::assemble_stab(m, d, stab_of(hs::StabKind::J0)));
    std::vector<std::vector<int>> tris(d.nR);
    for (int e = 0; e < m.num_edges(); ++e) {
        if (d.edge_dof[e] >= 0) {
            for (int t : m.edge_triangles()[e]) {
                tris[d.edge_dof[e]].push_back(t);
            }
        }
    }
    for (int a = 0; a < d.nR; ++a) {
        for (int b = 0; b < d.nR; ++b) {
            const bool share = std::any_of(tris[a].begin(), tris[a].end(), [&](int t) {
                return std::find(tris[b].begin(), tris[b].end(), t) != tris[b].end();
            });
            if (!share) {
                EXPECT_EQ(j0(a, b), 0.0);
            }
        }
    }
    EXPECT_NEAR((j0 - j0.transpose()).norm(), 0.0, 1e-15);
}

TEST(Stabilization, LinearInAlphaAndOverrides)
{
    const hs::Mesh m = hs::generate_structured(3);
    const hs::DofMap d = hs::build_dofmap(m);
    for (auto kind : {hs::StabKind::J0, hs::StabKind::JD}) {
        const Eigen::MatrixXd one = dense(hs::assemble_stab(m, d, stab_of(kind, 1.0)));
        const Eigen::MatrixXd two = dense(hs::assemble_stab(m, d, stab_of(kind, 2.0)));
        EXPECT_NEAR((two - 2.0 * one).norm(), 0.0, 1e-13);
    }
    hs::StabConfig per_edge = stab_of(hs::StabKind::JD);
    per_edge.alpha_edge.assign(m.num_edges(), 1.0);
    int target = -1;
    for (int e = 0; e < m.num_edges() && target < 0; ++e) {
        if (d.edge_dof[e] >= 0) {
            target = e;
        }
    }
    per_edge.alpha_edge[target] = 5.0;
    const Eigen::MatrixXd base = dense(hs::assemble_stab(m, d, stab_of(hs::StabKind::JD)));
    const Eigen::MatrixXd over = dense(hs::assemble_stab(m, d, per_edge));
    const int r = d.edge_dof[target];
    EXPECT_NEAR(over(r, r), 5.0 * base(r, r), 1e-14);
    EXPECT_NEAR((over - base).norm(), 4.0 * base(r, r), 1e-14);
}

TEST(Stabilization, RejectsInvalidParameters)
{
    const hs::Mesh m = hs::generate_structured(2);
    const hs::DofMap d = hs::build_dofmap(m);
    EXPECT_THROW(hs::assemble_stab(m, d, stab_of(hs::StabKind::JD, 0.0)), std::invalid_argument);
    EXPECT_THROW(hs::assemble_stab(m, d, stab_of(hs::StabKind::J0, -1.0)), std::invalid_argument);
    hs::StabConfig bad = stab_of(hs::StabKind::J0);
    bad.alpha_element.assign(3, 1.0);
    EXPECT_THROW(hs::assemble_stab(m, d, bad), std::invalid_argument);
}

TEST(Stabilization, DiagonalAndElementFormsAreEquivalent)
{
    std::mt19937 rng(42);
    std::normal_distribution<double> g;
    double lo = 1e300;
    double hi = 0.0;
    for (int n : {4, 8, 16}) {
        const hs::Mesh m = hs::generate_structured(n);
        const hs::DofMap d = hs::build_dofmap(m);
        const hs::SparseMatrix jd = hs::assemble_stab(m, d, stab_of(hs::StabKind::JD));
        const hs::SparseMatrix j0 = hs::assemble_stab(m, d, stab_of(hs::StabKind::J0));
        for (int trial = 0; trial < 50; ++trial) {
            hs::Vector v(d.nR);
            for (int i = 0; i < d.nR; ++i) {
                v(i) = g(rng);
            }
            const double ratio = v.dot(jd * v) / v.dot(j0 * v);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi / lo, 10.0);
}

TEST(Assembly, SingleCellDivergenceRow)
{
    const hs::Mesh m = hs::generate_structured(1);
    const hs::BlockSystem s = hs::assemble_system(m, hs::build_dofmap(m), stab_of(hs::StabKind::JD), 1.0,
                                                  kSmoothForce, hs::Scheme::Full);
    const Eigen::MatrixXd G = dense(s.G_R);
    ASSERT_EQ(G.rows(), 1);
    ASSERT_EQ(G.cols(), 2);
    EXPECT_NEAR(std::abs(G(0, 0)), std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(G(0, 0) + G(0, 1), 0.0, 1e-14);
    EXPECT_NEAR(s.c(0), 0.5, 1e-15);
    EXPECT_NEAR(s.c(1), 0.5, 1e-15);
}

TEST(Assembly, DivergenceRowsHaveTwoOppositeEntries)
{
    const hs::Mesh m = hs::generate_structured(4);
    const hs::DofMap d = hs::build_dofmap(m);
    const hs::BlockSystem s =
        hs::assemble_system(m, d, stab_of(hs::StabKind::J0), 1e-3, kZeroForce, hs::Scheme::Full);
    const Eigen::MatrixXd G = dense(s.G_R);
    for (int e = 0; e < m.num_edges(); ++e) {
        const int r = d.edge_dof[e];
        if (r < 0) {
            continue;
        }
        const auto [t1, t2] = m.edge_triangles()[e];
        EXPECT_NEAR(std::abs(G(r, t1)), m.edge_lengths()[e], 1e-14);
        EXPECT_NEAR(G(r, t1) + G(r, t2), 0.0, 1e-14);
        EXPECT_EQ((G.row(r).array() != 0.0).count(), 2);
    }
}

TEST(Assembly, ZeroForceGivesZeroLoad)
{
    const hs::Mesh m = hs::generate_structured(3);
    const hs::BlockSystem s = hs::assemble_system(m, hs::build_dofmap(m), stab_of(hs::StabKind::JD), 1.0,
                                                  kZeroForce, hs::Scheme::Full);
    EXPECT_EQ(s.F_L.norm(), 0.0);
    EXPECT_EQ(s.F_R.norm(), 0.0);
}

TEST(Assembly, ConstantForceLoadOnCentreVertex)
{
    const hs::Mesh m = hs::generate_structured(2);
    const hs::BlockSystem s = hs::assemble_system(m, hs::build_dofmap(m), stab_of(hs::StabKind::JD), 1.0,
                                                  [](const Point&) { return Point(2.0, -3.0); },
                                                  hs::Scheme::Full);
    // six triangles of area 1/8 around the centre, int lambda = |T| / 3
    EXPECT_NEAR(s.F_L(0), 2.0 * 6.0 / 8.0 / 3.0, 1e-14);
    EXPECT_NEAR(s.F_L(1), -3.0 * 6.0 / 8.0 / 3.0, 1e-14);
}

TEST(Assembly, LinearInViscosity)
{
    const hs::Mesh m = hs::generate_structured(3);
    const hs::DofMap d = hs::build_dofmap(m);
    for (auto kind : {hs::StabKind::J0, hs::StabKind::JD}) {
        const hs::BlockSystem a = hs::assemble_system(m, d, stab_of(kind), 0.7, kSmoothForce, hs::Scheme::Full);
        const hs::BlockSystem b = hs::assemble_system(m, d, stab_of(kind), 1.4, kSmoothForce, hs::Scheme::Full);
        EXPECT_NEAR((dense(b.A_LL) - 2.0 * dense(a.A_LL)).norm(), 0.0, 1e-13);
        EXPECT_NEAR((dense(b.A_RL) - 2.0 * dense(a.A_RL)).norm(), 0.0, 1e-13);
        EXPECT_NEAR((dense(b.A_RR) - 2.0 * dense(a.A_RR)).norm(), 0.0, 1e-13);
        EXPECT_EQ((dense(b.G_L) - dense(a.G_L)).norm(), 0.0);
        EXPECT_EQ((dense(b.G_R) - dense(a.G_R)).norm(), 0.0);
        EXPECT_EQ((b.F_L - a.F_L).norm(), 0.0);
        EXPECT_EQ((b.F_R - a.F_R).norm(), 0.0);
    }
}

TEST(Assembly, SchemeAndStabilizationMismatchIsRejected)
{
    const hs::Mesh m = hs::generate_structured(2);
    const hs::DofMap d = hs::build_dofmap(m);
    EXPECT_THROW(hs::assemble_system(m, d, stab_of(hs::StabKind::JD), 1.0, kZeroForce, hs::Scheme::BernardiRaugel),
                 std::invalid_argument);
    EXPECT_THROW(hs::assemble_system(m, d, std::nullopt, 1.0, kZeroForce, hs::Scheme::Full), std::invalid_argument);
    EXPECT_THROW(hs::assemble_system(m, d, stab_of(hs::StabKind::J0), 1.0, kZeroForce, hs::Scheme::Perturbed),
                 std::invalid_argument);
    EXPECT_THROW(hs::assemble_system(m, d, stab_of(hs::StabKind::JD), 0.0, kZeroForce, hs::Scheme::Full),
                 std::invalid_argument);
}

TEST(Assembly, IndependentOfElementOrder)
{
    const hs::Mesh m = hs::generate_structured(5);
    const hs::DofMap d = hs::build_dofmap(m);
    std::vector<int> order(m.num_triangles());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937(9));
    for (auto scheme : {hs::Scheme::Full, hs::Scheme::BernardiRaugel}) {
        const std::optional<hs::StabConfig> stab =
            scheme == hs::Scheme::Full ? std::optional(stab_of(hs::StabKind::J0)) : std::nullopt;
        const hs::BlockSystem a = hs::assemble_system(m, d, stab, 1.0, kSmoothForce, scheme);
        const hs::BlockSystem b = hs::assemble_system(m, d, stab, 1.0, kSmoothForce, scheme, order);
        EXPECT_NEAR((dense(a.A_LL) - dense(b.A_LL)).cwiseAbs().maxCoeff(), 0.0, 1e-15 * 16);
        EXPECT_NEAR((dense(a.A_RL) - dense(b.A_RL)).cwiseAbs().maxCoeff(), 0.0, 1e-15 * 16);
        EXPECT_NEAR((dense(a.A_RR) - dense(b.A_RR)).cwiseAbs().maxCoeff(), 0.0, 1e-15 * 16);
        EXPECT_NEAR((dense(a.G_L) - dense(b.G_L)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
        EXPECT_NEAR((dense(a.G_R) - dense(b.G_R)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
        EXPECT_NEAR((a.F_L - b.F_L).cwiseAbs().maxCoeff(), 0.0, 1e-15);
        EXPECT_NEAR((a.F_R - b.F_R).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    }
    EXPECT_THROW(hs::assemble_system(m, d, stab_of(hs::StabKind::JD), 1.0, kZeroForce, hs::Scheme::Full,
                                     std::span<const int>(order.data(), 3)),
                 std::invalid_argument);
}

TEST(Assembly, VelocityBlockIsSymmetricPositiveDefinite)
{
    for (int n : {2, 4}) {
        const hs::Mesh m = hs::generate_structured(n);
        const hs::DofMap d = hs::build_dofmap(m);
        for (auto kind : {hs::StabKind::J0, hs::StabKind::JD}) {
            const Eigen::MatrixXd A =
                velocity_block(hs::assemble_system(m, d, stab_of(kind), 1.0, kZeroForce, hs::Scheme::Full));
            EXPECT_NEAR((A - A.transpose()).norm(), 0.0, 1e-14);
            EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().minCoeff(), 1e-8);
        }
        const Eigen::MatrixXd B =
            velocity_block(hs::assemble_system(m, d, std::nullopt, 1.0, kZeroForce, hs::Scheme::BernardiRaugel));
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(B).eigenvalues().minCoeff(), 1e-8);
    }
}

TEST(Assembly, PositiveOnDiscretelyDivergenceFreeFields)
{
    const hs::Mesh m = hs::generate_structured(4);
    const hs::DofMap d = hs::build_dofmap(m);
    const hs::BlockSystem s = hs::assemble_system(m, d, stab_of(hs::StabKind::JD), 1.0, kZeroForce, hs::Scheme::Full);
    Eigen::MatrixXd B(d.nP, d.nR + d.n1);
    B << dense(s.G_R).transpose(), dense(s.G_L).transpose();
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::MatrixXd Z = lu.kernel();
    ASSERT_GT(Z.cols(), 0);
    const Eigen::MatrixXd K = Z.transpose() * velocity_block(s) * Z;
    const Eigen::MatrixXd M = Z.transpose() * Z;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
    EXPECT_GT(es.eigenvalues().minCoeff(), 1e-8);
}

TEST(Assembly, BubbleDivergenceRows)
{
    const hs::Mesh m = hs::generate_structured(3);
    const hs::DofMap d = hs::build_dofmap(m);
    const hs::BlockSystem s =
        hs::assemble_system(m, d, std::nullopt, 1.0, kZeroForce, hs::Scheme::BernardiRaugel);
    const Eigen::MatrixXd G = dense(s.G_R);
    for (int e = 0; e < m.num_edges(); ++e) {
        const int r = d.edge_dof[e];
        if (r < 0) {
            continue;
        }
        const auto [t1, t2] = m.edge_triangles()[e];
        EXPECT_NEAR(std::abs(G(r, t1)), 2.0 / 3.0 * m.edge_lengths()[e], 1e-13);
        EXPECT_NEAR(G(r, t1) + G(r, t2), 0.0, 1e-13);
    }
}
