#include "hdiv_stokes/saddle_solver.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace hdiv_stokes {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void append_block(Triplets& out, const SparseMatrix& block, int row0, int col0, double scale,
                  bool mirror)
{
    for (int k = 0; k < block.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(block, k); it; ++it) {
            const int r = row0 + static_cast<int>(it.row());
            const int c = col0 + static_cast<int>(it.col());
            out.emplace_back(r, c, scale * it.value());
            if (mirror) {
                out.emplace_back(c, r, scale * it.value());
            }
        }
    }
}

}  // namespace

GlobalSystem to_global(const BlockSystem& sys)
{
    const int nR = sys.nR();
    const int n1 = sys.n1();
    const int nP = sys.nP();
    auto check = [](const SparseMatrix& m, int rows, int cols, const char* name) {
        if (m.rows() != rows || m.cols() != cols) {
            throw std::invalid_argument(std::string("block ") + name + " has shape " +
                                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                        ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
        }
    };
    check(sys.A_RR, nR, nR, "A_RR");
    check(sys.A_RL, nR, n1, "A_RL");
    check(sys.A_LL, n1, n1, "A_LL");
    check(sys.G_R, nR, nP, "G_R");
    check(sys.G_L, n1, nP, "G_L");

    const int oR = 0;
    const int oL = nR;
    const int oP = nR + n1;
    const int oM = nR + n1 + nP;

    Triplets trip;
    append_block(trip, sys.A_RR, oR, oR, 1.0, false);
    append_block(trip, sys.A_RL, oR, oL, 1.0, true);
    append_block(trip, sys.A_LL, oL, oL, 1.0, false);
    append_block(trip, sys.G_R, oR, oP, -1.0, true);
    append_block(trip, sys.G_L, oL, oP, -1.0, true);
    for (int t = 0; t < nP; ++t) {
        trip.emplace_back(oP + t, oM, sys.c(t));
        trip.emplace_back(oM, oP + t, sys.c(t));
    }

    GlobalSystem g;
    g.nR = nR;
    g.n1 = n1;
    g.nP = nP;
    g.scheme = sys.scheme;
    g.matrix.resize(g.size(), g.size());
    g.matrix.setFromTriplets(trip.begin(), trip.end());
    g.matrix.makeCompressed();
    g.rhs = Vector::Zero(g.size());
    g.rhs.segment(oR, nR) = sys.F_R;
    g.rhs.segment(oL, n1) = sys.F_L;
    return g;
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using LU = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;

void factorize(LU& lu, const ColMatrix& a)
{
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw SolveError("sparse LU factorization failed: " + lu.lastErrorMessage(),
                         std::numeric_limits<double>::infinity());
    }
}

}  // namespace

Vector refined_solve(const SparseMatrix& matrix, const Vector& rhs, const LinearSolve& apply,
                     double* relative_residual)
{
    const double bnorm = rhs.norm();
    if (bnorm == 0.0) {
        if (relative_residual) {
            *relative_residual = 0.0;
        }
        return Vector::Zero(matrix.cols());
    }
    Vector x = apply(rhs);
    Vector r = rhs - matrix * x;
    double res = r.norm() / bnorm;
    for (int step = 0; step < kRefinementSteps && res > 0.0; ++step) {
        const Vector y = x + apply(r);
        const Vector ry = rhs - matrix * y;
        const double res_y = ry.norm() / bnorm;
        if (!(res_y < res)) {
            break;
        }
        x = y;
        r = ry;
        res = res_y;
    }
    if (relative_residual) {
        *relative_residual = res;
    }
    if (!std::isfinite(res) || res > kSolveTolerance) {
        throw SolveError("linear solve residual " + std::to_string(res) + " exceeds tolerance", res);
    }
    return x;
}

struct BorderedLU::Impl {
    LU lu;
    Vector c;
    double csum = 0.0;
    int p0 = 0;
    int nP = 0;
    int n = 0;
};

// The pressure block of the unbordered matrix has the constants as its
// kernel, and the border row only fixes that constant. Supernodal LU fills in
// badly around the dense border, so factor the unbordered matrix with the
// first pressure pinned instead and restore the constraint afterwards.
BorderedLU::BorderedLU(const SparseMatrix& matrix, int pressure_offset, int num_pressure)
    : impl_(std::make_unique<Impl>())
{
    const int n = static_cast<int>(matrix.rows());
    if (matrix.cols() != n || num_pressure < 1 || pressure_offset < 0 ||
        pressure_offset + num_pressure + 1 != n) {
        throw std::invalid_argument("bordered system layout does not match the matrix");
    }
    Impl& d = *impl_;
    d.p0 = pressure_offset;
    d.nP = num_pressure;
    d.n = n;
    const int m = n - 1;
    d.c = Vector::Zero(num_pressure);
    for (SparseMatrix::InnerIterator it(matrix, m); it; ++it) {
        if (it.col() >= d.p0 && it.col() < d.p0 + d.nP) {
            d.c(it.col() - d.p0) = it.value();
        }
    }
    d.csum = d.c.sum();
    if (!(d.csum > 0.0)) {
        throw SolveError("mean-value border is empty", std::numeric_limits<double>::infinity());
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(matrix.nonZeros());
    for (int r = 0; r < m; ++r) {
        for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
            const int col = static_cast<int>(it.col());
            if (col == m || r == d.p0 || col == d.p0) {
                continue;
            }
            trip.emplace_back(r, col, it.value());
        }
    }
    trip.emplace_back(d.p0, d.p0, 1.0);
    ColMatrix reduced(m, m);
    reduced.setFromTriplets(trip.begin(), trip.end());
    reduced.makeCompressed();
    factorize(d.lu, reduced);
}

BorderedLU::~BorderedLU() = default;
BorderedLU::BorderedLU(BorderedLU&&) noexcept = default;
BorderedLU& BorderedLU::operator=(BorderedLU&&) noexcept = default;

Vector BorderedLU::solve(const Vector& b) const
{
    const Impl& d = *impl_;
    if (b.size() != d.n) {
        throw std::invalid_argument("right-hand side has the wrong length");
    }
    const int m = d.n - 1;
    Vector top = b.head(m);
    top(d.p0) = 0.0;
    Vector x(d.n);
    x.head(m) = d.lu.solve(top);
    auto p = x.segment(d.p0, d.nP);
    p.array() += (b(m) - d.c.dot(p)) / d.csum;
    x(m) = b.segment(d.p0, d.nP).sum() / d.csum;
    return x;
}

Vector solve_sparse(const SparseMatrix& matrix, const Vector& rhs, double* relative_residual)
{
    std::optional<LU> lu;
    ColMatrix a;
    return refined_solve(matrix, rhs, [&](const Vector& b) -> Vector {
        if (!lu) {
            a = matrix;
            lu.emplace();
            factorize(*lu, a);
        }
        return lu->solve(b);
    }, relative_residual);
}

Vector solve_bordered(const SparseMatrix& matrix, const Vector& rhs, int pressure_offset, int num_pressure,
                      double* relative_residual)
{
    if (rhs.size() != matrix.rows()) {
        throw std::invalid_argument("right-hand side has the wrong length");
    }
    std::optional<BorderedLU> lu;
    return refined_solve(matrix, rhs, [&](const Vector& b) -> Vector {
        if (!lu) {
            lu.emplace(matrix, pressure_offset, num_pressure);
        }
        return lu->solve(b);
    }, relative_residual);
}

Solution solve(const GlobalSystem& system)
{
    Solution s;
    s.scheme = system.scheme;
    const Vector x =
        solve_bordered(system.matrix, system.rhs, system.nR + system.n1, system.nP, &s.relative_residual);
    s.U_R = x.segment(0, system.nR);
    s.U_L = x.segment(system.nR, system.n1);
    s.P = x.segment(system.nR + system.n1, system.nP);
    s.multiplier = x(system.size() - 1);
    return s;
}

void write_coordinate(const SparseMatrix& matrix, std::ostream& out)
{
    out << std::setprecision(17);
    for (int k = 0; k < matrix.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
}

}  // namespace hdiv_stokes
