#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <Eigen/Dense>

#include "hdiv_stokes/interp.hpp"
#include "hdiv_stokes/saddle_solver.hpp"
#include "test_support.hpp"

namespace hs = hdiv_stokes;
using hs::Point;
using hs::test::dense;

namespace {

const hs::VectorField kSmoothForce = [](const Point& x) {
    return Point(std::sin(3.0 * x.x()) + x.y() * x.y(), std::cos(2.0 * x.y()) * x.x() - 1.0);
};

hs::BlockSystem system_on(const hs::Mesh& m, double nu, const hs::VectorField& f,
                          hs::StabKind kind = hs::StabKind::JD)
{
    hs::StabConfig stab;
    stab.kind = kind;
    return hs::assemble_system(m, hs::build_dofmap(m), stab, nu, f, hs::Scheme::Full);
}

double weighted_mean(const hs::Vector& P, const hs::Vector& c) { return P.dot(c) / c.sum(); }

}  // namespace

TEST(GlobalSystem, SingleCellLayout)
{
    const hs::Mesh m = hs::generate_structured(1);
    const hs::GlobalSystem g = hs::to_global(system_on(m, 1.0, kSmoothForce));
    ASSERT_EQ(g.size(), 4);
    const Eigen::MatrixXd A = dense(g.matrix);
    EXPECT_EQ((A - A.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(A(3, 1), 0.5);
    EXPECT_EQ(A(3, 2), 0.5);
    EXPECT_EQ(A(3, 0), 0.0);
    EXPECT_EQ(A.bottomRightCorner(3, 3).diagonal().norm(), 0.0);
}

TEST(GlobalSystem, SymmetricOnLargerMesh)
{
    const hs::GlobalSystem g = hs::to_global(system_on(hs::generate_structured(6), 1e-2, kSmoothForce));
    const hs::SparseMatrix asym = g.matrix - hs::SparseMatrix(g.matrix.transpose());
    EXPECT_EQ(asym.norm(), 0.0);
}

TEST(GlobalSystem, RejectsInconsistentBlocks)
{
    hs::BlockSystem s = system_on(hs::generate_structured(2), 1.0, kSmoothForce);
    s.G_L.resize(s.n1(), s.nP() + 1);
    EXPECT_THROW(hs::to_global(s), std::invalid_argument);
}

TEST(Solve, ZeroForceGivesZeroSolution)
{
    const hs::Solution sol =
        hs::solve(hs::to_global(system_on(hs::generate_structured(4), 1.0, [](const Point&) { return Point(0, 0); })));
    EXPECT_EQ(sol.U_L.norm() + sol.U_R.norm() + sol.P.norm(), 0.0);
}

TEST(Solve, SingleCellRT0UnknownVanishes)
{
    const hs::Mesh m = hs::generate_structured(1);
    for (const hs::VectorField& f :
         {kSmoothForce, hs::VectorField([](const Point&) { return Point(1.0, 0.0); }),
          hs::VectorField([](const Point& x) { return Point(x.y(), -x.x()); })}) {
        const hs::Solution sol = hs::solve(hs::to_global(system_on(m, 1.0, f)));
        ASSERT_EQ(sol.U_R.size(), 1);
        EXPECT_NEAR(sol.U_R(0), 0.0, 1e-14);
    }
}

TEST(Solve, GradientForceGivesZeroVelocityAndProjectedPressure)
{
    const hs::Mesh m = hs::generate_structured(4);
    const hs::BlockSystem s = system_on(m, 1e-3, [](const Point&) { return Point(1.0, 0.0); });
    const hs::Solution sol = hs::solve(hs::to_global(s));
    EXPECT_LT(sol.U_L.lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LT(sol.U_R.lpNorm<Eigen::Infinity>(), 1e-12);
    hs::Vector expected = hs::project_p0(m, [](const Point& x) { return x.x(); });
    expected.array() -= weighted_mean(expected, s.c);
    EXPECT_LT((sol.P - expected).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Solve, SolutionInvariants)
{
    for (auto kind : {hs::StabKind::J0, hs::StabKind::JD}) {
        const hs::BlockSystem s = system_on(hs::generate_structured(8), 1e-6, kSmoothForce, kind);
        const hs::Solution sol = hs::solve(hs::to_global(s));
        EXPECT_LE(sol.relative_residual, hs::kSolveTolerance);
        EXPECT_NEAR(weighted_mean(sol.P, s.c), 0.0, 1e-12 * (1.0 + sol.P.lpNorm<Eigen::Infinity>()));
        const hs::Vector div = s.G_R.transpose() * sol.U_R + s.G_L.transpose() * sol.U_L;
        const double scale = std::max(sol.U_R.lpNorm<Eigen::Infinity>(), sol.U_L.lpNorm<Eigen::Infinity>());
        EXPECT_LE(div.lpNorm<Eigen::Infinity>(), 1e-9 * scale);
    }
}

TEST(Solve, ViscosityRescaling)
{
    // nu A U - G P = F with U/2 and P solves the 2 nu problem
    const hs::Mesh m = hs::generate_structured(6);
    const hs::Solution a = hs::solve(hs::to_global(system_on(m, 0.3, kSmoothForce)));
    const hs::Solution b = hs::solve(hs::to_global(system_on(m, 0.6, kSmoothForce)));
    EXPECT_LT((2.0 * b.U_L - a.U_L).norm(), 1e-10 * a.U_L.norm());
    EXPECT_LT((2.0 * b.U_R - a.U_R).norm(), 1e-10 * a.U_R.norm());
    EXPECT_LT((b.P - a.P).norm(), 1e-10 * a.P.norm());
}

TEST(Solve, AgreesWithPlainLUUnderSymmetricPermutation)
{
    const hs::GlobalSystem g = hs::to_global(system_on(hs::generate_structured(5), 1e-2, kSmoothForce));
    const hs::Solution sol = hs::solve(g);
    hs::Vector ref(g.size());
    ref << sol.U_R, sol.U_L, sol.P, sol.multiplier;

    std::vector<int> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(4));
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P(g.size());
    for (int i = 0; i < g.size(); ++i) {
        P.indices()(i) = perm[i];
    }
    hs::SparseMatrix permuted;
    permuted = g.matrix.twistedBy(P);
    const hs::Vector y = hs::solve_sparse(permuted, P * g.rhs);
    const hs::Vector x = P.inverse() * y;
    EXPECT_LT((x - ref).lpNorm<Eigen::Infinity>(), 1e-12 * (1.0 + ref.lpNorm<Eigen::Infinity>()));
}

TEST(Solve, DeterministicAcrossRuns)
{
    const hs::GlobalSystem g = hs::to_global(system_on(hs::generate_structured(6), 1e-6, kSmoothForce));
    const hs::Solution a = hs::solve(g);
    const hs::Solution b = hs::solve(g);
    EXPECT_EQ(a.U_L, b.U_L);
    EXPECT_EQ(a.U_R, b.U_R);
    EXPECT_EQ(a.P, b.P);
}

TEST(Solve, SingularMatrixRaisesSolveError)
{
    hs::SparseMatrix zero(3, 3);
    zero.insert(0, 0) = 1.0;
    zero.makeCompressed();
    try {
        hs::solve_sparse(zero, hs::Vector::Ones(3));
        FAIL() << "expected SolveError";
    } catch (const hs::SolveError& e) {
        EXPECT_FALSE(e.residual() <= hs::kSolveTolerance);
    }
}

TEST(Solve, CoordinateExport)
{
    const hs::GlobalSystem g = hs::to_global(system_on(hs::generate_structured(1), 1.0, kSmoothForce));
    std::ostringstream out;
    hs::write_coordinate(g.matrix, out);
    std::istringstream in(out.str());
    int r = 0;
    int c = 0;
    double v = 0.0;
    Eigen::MatrixXd back = Eigen::MatrixXd::Zero(g.size(), g.size());
    int lines = 0;
    while (in >> r >> c >> v) {
        back(r, c) = v;
        ++lines;
    }
    EXPECT_EQ(lines, g.matrix.nonZeros());
    EXPECT_EQ((back - dense(g.matrix)).norm(), 0.0);
}
