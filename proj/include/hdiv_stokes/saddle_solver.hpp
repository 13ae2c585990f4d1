#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>

#include "hdiv_stokes/assembly.hpp"

namespace hdiv_stokes {

/// Bordered symmetric saddle-point matrix in the unknown ordering
/// [U_R; U_L; P; lambda]:
///
///     [ A_RR    A_RL  -G_R  0 ]
///     [ A_RL^T  A_LL  -G_L  0 ]
///     [ -G_R^T -G_L^T  0    c ]
///     [ 0       0      c^T  0 ]
///
/// The sign of the coupling follows nu a_h(u, v) - b(v, p) = (f, v).
struct GlobalSystem {
    SparseMatrix matrix;
    Vector rhs;
    int nR = 0;
    int n1 = 0;
    int nP = 0;
    Scheme scheme = Scheme::Full;

    [[nodiscard]] int size() const { return nR + n1 + nP + 1; }
};

struct Solution {
    Vector U_L;
    Vector U_R;
    Vector P;
    double multiplier = 0.0;
    Scheme scheme = Scheme::Full;
    double relative_residual = 0.0;
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual)
    {
    }
    [[nodiscard]] double residual() const { return residual_; }

private:
    double residual_;
};

inline constexpr double kSolveTolerance = 1e-10;
inline constexpr int kRefinementSteps = 3;

GlobalSystem to_global(const BlockSystem& sys);

using LinearSolve = std::function<Vector(const Vector&)>;

/// x = apply(rhs) followed by iterative refinement against `matrix`, kept
/// while the residual decreases. Throws SolveError when the final relative
/// residual exceeds kSolveTolerance.
Vector refined_solve(const SparseMatrix& matrix, const Vector& rhs, const LinearSolve& apply,
                     double* relative_residual = nullptr);

/// LU factorization of a matrix laid out as GlobalSystem::matrix, with the
/// pressure unknowns at [pressure_offset, pressure_offset + num_pressure) and
/// the mean-value multiplier last. Relies on the constants spanning the
/// pressure kernel of the unbordered matrix.
class BorderedLU {
public:
    BorderedLU(const SparseMatrix& matrix, int pressure_offset, int num_pressure);
    ~BorderedLU();
    BorderedLU(BorderedLU&&) noexcept;
    BorderedLU& operator=(BorderedLU&&) noexcept;

    [[nodiscard]] Vector solve(const Vector& rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Sparse LU with partial pivoting and iterative refinement.
Vector solve_sparse(const SparseMatrix& matrix, const Vector& rhs, double* relative_residual = nullptr);

/// BorderedLU with iterative refinement.
Vector solve_bordered(const SparseMatrix& matrix, const Vector& rhs, int pressure_offset, int num_pressure,
                      double* relative_residual = nullptr);

Solution solve(const GlobalSystem& system);

/// Coordinate text export, one `row col value` line per stored entry.
void write_coordinate(const SparseMatrix& matrix, std::ostream& out);

}  // namespace hdiv_stokes
