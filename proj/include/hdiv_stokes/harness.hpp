#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hdiv_stokes/assembly.hpp"
#include "hdiv_stokes/saddle_solver.hpp"

namespace hdiv_stokes {

using TensorField = std::function<Eigen::Matrix2d(const Point&)>;

/// Closed-form Stokes solution with its forcing f = -nu Lap u + grad p.
/// `velocity_gradient(x)(i, j)` is d u_i / d x_j.
struct ManufacturedCase {
    double nu = 1.0;
    VectorField velocity;
    TensorField velocity_gradient;
    VectorField velocity_laplacian;
    ScalarField pressure;
    VectorField pressure_gradient;
    VectorField force;
};

/// Vortex u = curl(100 x^2 (1-x)^2 y^2 (1-y)^2) with the cubic pressure
/// 10((x - 1/2)^3 y^2 + (1 - x)^3 (y - 1/2)^3).
ManufacturedCase vortex_case(double nu);

/// Largest relative deviation of the closed-form Laplacian and pressure
/// gradient from centred second-order finite differences at `samples`
/// random interior points.
double forcing_fd_error(const ManufacturedCase& mc, int samples = 100, unsigned seed = 20240601);

/// Which discrete problem to solve.
enum class Method {
    Full,            ///< P1c + RT0 - P0 with J0 or JD
    Condensed,       ///< diagonally perturbed scheme, solved by static condensation
    PerturbedDirect, ///< diagonally perturbed scheme, solved without condensation
    BernardiRaugel,  ///< P1c + edge bubbles - P0
};

std::string_view to_string(Method m);
Method parse_method(std::string_view name);
StabKind parse_stab(std::string_view name);

struct SolveConfig {
    double nu = 1e-6;
    std::optional<StabConfig> stab = StabConfig{};
    Method method = Method::Full;
};

Solution run_method(const Mesh& mesh, const DofMap& dofs, const VectorField& f, const SolveConfig& cfg);

/// Value and gradient of the discrete velocity at a point of triangle t.
struct VelocitySample {
    Point value;
    Eigen::Matrix2d gradient;
};

VelocitySample evaluate_velocity(const Mesh& mesh, const DofMap& dofs, const Solution& sol, int t,
                                 const TriangleGeometry& tri, const std::array<double, 3>& bary);

struct DivergenceReport {
    double max_mean = 0.0;       ///< max_T |(div u_h, 1)_T| / |T|
    double max_pointwise = 0.0;  ///< max over quadrature points of |div u_h|
    double max_velocity = 0.0;   ///< max over quadrature points of |u_h|
};

DivergenceReport divergence_check(const Mesh& mesh, const DofMap& dofs, const Solution& sol);

struct ErrorReport {
    int n = 0;
    double h = 0.0;
    double h1_u = 0.0;   ///< broken H1 seminorm of u - u_h
    double l2_u = 0.0;
    double l2_p = 0.0;   ///< against the zero-mean exact pressure
    double max_div = 0.0;
    double max_div_mean = 0.0;
    double eoc_h1 = std::numeric_limits<double>::quiet_NaN();
    double eoc_l2u = std::numeric_limits<double>::quiet_NaN();
    double eoc_l2p = std::numeric_limits<double>::quiet_NaN();
};

ErrorReport compute_errors(const Mesh& mesh, const DofMap& dofs, const Solution& sol, const ManufacturedCase& mc);

/// Fills the eoc_* fields from consecutive levels.
void compute_orders(std::vector<ErrorReport>& reports);

struct ConvergenceResult {
    std::vector<ErrorReport> reports;
    bool complete = true;
    std::string failure;  ///< set when a level failed; reports hold the levels before it
};

ConvergenceResult convergence_study(const std::vector<int>& levels, const SolveConfig& cfg);

/// Potential psi (zero mean over the unit square) used to perturb the forcing.
struct GradientPerturbation {
    std::string name;
    ScalarField psi;
    VectorField gradient;
};

/// `x`, `cubic` or `zero`.
GradientPerturbation make_perturbation(std::string_view name);

struct RobustnessReport {
    double velocity_change = 0.0;        ///< ||dU|| / ||U||, over (U_L, U_R)
    double velocity_change_L = 0.0;      ///< ||dU_L||_inf
    double velocity_change_R = 0.0;      ///< ||dU_R||_inf
    double pressure_mismatch = 0.0;      ///< ||dP - P_h psi||_inf / ||P_h psi||_inf (absolute if psi = 0)
    Solution base;
    Solution perturbed;
};

/// Solves with f and with f + grad psi on the same mesh.
RobustnessReport robustness_test(const Mesh& mesh, const SolveConfig& cfg, const VectorField& base_force,
                                 const GradientPerturbation& psi);

/// CSV with header `n,h,h1_u,l2_u,l2_p,max_div,eoc_h1,eoc_l2u,eoc_l2p`;
/// undefined orders are left empty.
void write_csv(const std::vector<ErrorReport>& reports, std::ostream& out);

/// VTK legacy unstructured grid: vertex-averaged velocity as point data,
/// centroid velocity and pressure as cell data.
void write_vtk(const Mesh& mesh, const DofMap& dofs, const Solution& sol, std::ostream& out);

}  // namespace hdiv_stokes
