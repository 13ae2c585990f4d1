#include "hdiv_stokes/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

#include "hdiv_stokes/condensation.hpp"
#include "hdiv_stokes/interp.hpp"

namespace hdiv_stokes {

namespace {

// g(s) = s^2 (1 - s)^2 and its derivatives.
double g0(double s) { return s * s * (1.0 - s) * (1.0 - s); }
double g1(double s) { return 2.0 * s - 6.0 * s * s + 4.0 * s * s * s; }
double g2(double s) { return 2.0 - 12.0 * s + 12.0 * s * s; }
double g3(double s) { return -12.0 + 24.0 * s; }

double cube(double s) { return s * s * s; }

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return {};
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

}  // namespace

ManufacturedCase vortex_case(double nu)
{
    if (!(nu > 0.0)) {
        throw std::invalid_argument("viscosity must be positive");
    }
    ManufacturedCase mc;
    mc.nu = nu;
    mc.velocity = [](const Point& x) {
        return Point(100.0 * g0(x.x()) * g1(x.y()), -100.0 * g1(x.x()) * g0(x.y()));
    };
    mc.velocity_gradient = [](const Point& x) {
        Eigen::Matrix2d g;
        g << 100.0 * g1(x.x()) * g1(x.y()), 100.0 * g0(x.x()) * g2(x.y()),
            -100.0 * g2(x.x()) * g0(x.y()), -100.0 * g1(x.x()) * g1(x.y());
        return g;
    };
    mc.velocity_laplacian = [](const Point& x) {
        return Point(100.0 * (g2(x.x()) * g1(x.y()) + g0(x.x()) * g3(x.y())),
                     -100.0 * (g3(x.x()) * g0(x.y()) + g1(x.x()) * g2(x.y())));
    };
    mc.pressure = [](const Point& x) {
        return 10.0 * (cube(x.x() - 0.5) * x.y() * x.y() + cube(1.0 - x.x()) * cube(x.y() - 0.5));
    };
    mc.pressure_gradient = [](const Point& x) {
        const double a = x.x() - 0.5;
        const double b = 1.0 - x.x();
        const double c = x.y() - 0.5;
        return Point(10.0 * (3.0 * a * a * x.y() * x.y() - 3.0 * b * b * cube(c)),
                     10.0 * (2.0 * cube(a) * x.y() + 3.0 * cube(b) * c * c));
    };
    mc.force = [nu, lap = mc.velocity_laplacian, grad = mc.pressure_gradient](const Point& x) {
        return Point(-nu * lap(x) + grad(x));
    };
    return mc;
}

double forcing_fd_error(const ManufacturedCase& mc, int samples, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coord(0.05, 0.95);
    constexpr double step = 1e-4;
    const Point ex(step, 0.0);
    const Point ey(0.0, step);
    double lap_err = 0.0;
    double lap_scale = 0.0;
    double grad_err = 0.0;
    double grad_scale = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Point x(coord(rng), coord(rng));
        const Point fd_lap = (mc.velocity(x + ex) + mc.velocity(x - ex) + mc.velocity(x + ey) +
                              mc.velocity(x - ey) - 4.0 * mc.velocity(x)) /
                             (step * step);
        const Point fd_grad((mc.pressure(x + ex) - mc.pressure(x - ex)) / (2.0 * step),
                            (mc.pressure(x + ey) - mc.pressure(x - ey)) / (2.0 * step));
        lap_err = std::max(lap_err, (fd_lap - mc.velocity_laplacian(x)).lpNorm<Eigen::Infinity>());
        lap_scale = std::max(lap_scale, mc.velocity_laplacian(x).lpNorm<Eigen::Infinity>());
        grad_err = std::max(grad_err, (fd_grad - mc.pressure_gradient(x)).lpNorm<Eigen::Infinity>());
        grad_scale = std::max(grad_scale, mc.pressure_gradient(x).lpNorm<Eigen::Infinity>());
        const Point f_expected = -mc.nu * mc.velocity_laplacian(x) + mc.pressure_gradient(x);
        if ((mc.force(x) - f_expected).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + f_expected.norm())) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return std::max(lap_err / lap_scale, grad_err / grad_scale);
}

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::Full: return "full";
    case Method::Condensed: return "condensed";
    case Method::PerturbedDirect: return "perturbed";
    case Method::BernardiRaugel: return "br";
    }
    return "unknown";
}

Method parse_method(std::string_view name)
{
    if (name == "full") return Method::Full;
    if (name == "condensed") return Method::Condensed;
    if (name == "perturbed") return Method::PerturbedDirect;
    if (name == "br" || name == "bernardi-raugel") return Method::BernardiRaugel;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

StabKind parse_stab(std::string_view name)
{
    if (name == "j0") return StabKind::J0;
    if (name == "jd") return StabKind::JD;
    throw std::invalid_argument("unknown stabilization '" + std::string(name) + "'");
}

Solution run_method(const Mesh& mesh, const DofMap& dofs, const VectorField& f, const SolveConfig& cfg)
{
    switch (cfg.method) {
    case Method::Full:
        return solve(to_global(assemble_system(mesh, dofs, cfg.stab, cfg.nu, f, Scheme::Full)));
    case Method::Condensed:
        return solve_condensed(assemble_system(mesh, dofs, cfg.stab, cfg.nu, f, Scheme::Perturbed));
    case Method::PerturbedDirect:
        return solve(to_global(assemble_system(mesh, dofs, cfg.stab, cfg.nu, f, Scheme::Perturbed)));
    case Method::BernardiRaugel:
        return solve(to_global(assemble_system(mesh, dofs, cfg.stab, cfg.nu, f, Scheme::BernardiRaugel)));
    }
    throw std::invalid_argument("unknown method");
}

VelocitySample evaluate_velocity(const Mesh& mesh, const DofMap& dofs, const Solution& sol, int t,
                                 const TriangleGeometry& tri, const std::array<double, 3>& bary)
{
    VelocitySample s{Point::Zero(), Eigen::Matrix2d::Zero()};
    const auto& vt = mesh.triangles()[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
        const int d = dofs.vertex_dof[vt[i]];
        if (d < 0) {
            continue;
        }
        const Point nodal(sol.U_L(d), sol.U_L(d + 1));
        s.value += bary[i] * nodal;
        s.gradient += nodal * tri.grad_lambda[i].transpose();
    }
    const Point x = tri.map(bary);
    for (int k = 0; k < 3; ++k) {
        const EdgeRef ref = mesh.tri_edges()[t][k];
        const int r = dofs.edge_dof[ref.edge];
        if (r < 0) {
            continue;
        }
        const double coef = sol.U_R(r);
        if (sol.scheme == Scheme::BernardiRaugel) {
            const Point& n = mesh.edge_normals()[ref.edge];
            s.value += coef * bubble_value(bary, k) * n;
            s.gradient += coef * n * bubble_gradient(tri, bary, k).transpose();
        } else {
            const RT0Basis phi = rt0_basis(tri, k, ref.sign);
            s.value += coef * phi(x);
            s.gradient += coef * phi.scale * Eigen::Matrix2d::Identity();
        }
    }
    return s;
}

DivergenceReport divergence_check(const Mesh& mesh, const DofMap& dofs, const Solution& sol)
{
    const QuadratureRule rule = quadrature(kLoadQuadratureExactness);
    DivergenceReport rep;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const TriangleGeometry tri = triangle_geometry(mesh.triangle_points(t));
        double mean = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const VelocitySample s = evaluate_velocity(mesh, dofs, sol, t, tri, rule.points[q]);
            const double div = s.gradient.trace();
            mean += 2.0 * rule.weights[q] * div;
            rep.max_pointwise = std::max(rep.max_pointwise, std::abs(div));
            rep.max_velocity = std::max(rep.max_velocity, s.value.norm());
        }
        rep.max_mean = std::max(rep.max_mean, std::abs(mean));
    }
    return rep;
}

ErrorReport compute_errors(const Mesh& mesh, const DofMap& dofs, const Solution& sol, const ManufacturedCase& mc)
{
    const QuadratureRule rule = quadrature(kLoadQuadratureExactness);
    double area = 0.0;
    double p_integral = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const TriangleGeometry tri = triangle_geometry(mesh.triangle_points(t));
        area += tri.area;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            p_integral += 2.0 * tri.area * rule.weights[q] * mc.pressure(tri.map(rule.points[q]));
        }
    }
    const double p_mean = p_integral / area;

    ErrorReport rep;
    double h1 = 0.0;
    double l2u = 0.0;
    double l2p = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const TriangleGeometry tri = triangle_geometry(mesh.triangle_points(t));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point x = tri.map(rule.points[q]);
            const double w = 2.0 * tri.area * rule.weights[q];
            const VelocitySample s = evaluate_velocity(mesh, dofs, sol, t, tri, rule.points[q]);
            h1 += w * (mc.velocity_gradient(x) - s.gradient).squaredNorm();
            l2u += w * (mc.velocity(x) - s.value).squaredNorm();
            const double dp = mc.pressure(x) - p_mean - sol.P(t);
            l2p += w * dp * dp;
        }
    }
    rep.h = shape_metrics(mesh).h;
    rep.h1_u = std::sqrt(h1);
    rep.l2_u = std::sqrt(l2u);
    rep.l2_p = std::sqrt(l2p);
    const DivergenceReport div = divergence_check(mesh, dofs, sol);
    rep.max_div = div.max_pointwise;
    rep.max_div_mean = div.max_mean;
    return rep;
}

void compute_orders(std::vector<ErrorReport>& reports)
{
    auto order = [](double e_coarse, double e_fine, double h_coarse, double h_fine) {
        return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
    };
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const auto& a = reports[i - 1];
        auto& b = reports[i];
        b.eoc_h1 = order(a.h1_u, b.h1_u, a.h, b.h);
        b.eoc_l2u = order(a.l2_u, b.l2_u, a.h, b.h);
        b.eoc_l2p = order(a.l2_p, b.l2_p, a.h, b.h);
    }
}

ConvergenceResult convergence_study(const std::vector<int>& levels, const SolveConfig& cfg)
{
    const ManufacturedCase mc = vortex_case(cfg.nu);
    if (const double fd = forcing_fd_error(mc); !(fd <= 1e-6)) {
        throw std::runtime_error("closed-form forcing disagrees with finite differences (rel. error " +
                                 std::to_string(fd) + ")");
    }
    ConvergenceResult result;
    for (int n : levels) {
        try {
            const Mesh mesh = generate_structured(n);
            const DofMap dofs = build_dofmap(mesh);
            const Solution sol = run_method(mesh, dofs, mc.force, cfg);
            ErrorReport rep = compute_errors(mesh, dofs, sol, mc);
            rep.n = n;
            result.reports.push_back(rep);
        } catch (const std::exception& e) {
            result.complete = false;
            result.failure = "level n=" + std::to_string(n) + ": " + e.what();
            break;
        }
    }
    compute_orders(result.reports);
    return result;
}

GradientPerturbation make_perturbation(std::string_view name)
{
    if (name == "x") {
        return {"x", [](const Point& x) { return x.x() - 0.5; }, [](const Point&) { return Point(1.0, 0.0); }};
    }
    if (name == "cubic") {
        return {"cubic", [](const Point& x) { return cube(x.x() - 0.5) + cube(x.y() - 0.5); },
                [](const Point& x) {
                    return Point(3.0 * (x.x() - 0.5) * (x.x() - 0.5), 3.0 * (x.y() - 0.5) * (x.y() - 0.5));
                }};
    }
    if (name == "zero") {
        return {"zero", [](const Point&) { return 0.0; }, [](const Point&) { return Point(0.0, 0.0); }};
    }
    throw std::invalid_argument("unknown potential '" + std::string(name) + "' (expected x, cubic or zero)");
}

RobustnessReport robustness_test(const Mesh& mesh, const SolveConfig& cfg, const VectorField& base_force,
                                 const GradientPerturbation& psi)
{
    const DofMap dofs = build_dofmap(mesh);
    RobustnessReport rep;
    rep.base = run_method(mesh, dofs, base_force, cfg);
    const VectorField shifted = [&](const Point& x) { return Point(base_force(x) + psi.gradient(x)); };
    rep.perturbed = run_method(mesh, dofs, shifted, cfg);

    const Vector dL = rep.perturbed.U_L - rep.base.U_L;
    const Vector dR = rep.perturbed.U_R - rep.base.U_R;
    rep.velocity_change_L = dL.size() ? dL.lpNorm<Eigen::Infinity>() : 0.0;
    rep.velocity_change_R = dR.size() ? dR.lpNorm<Eigen::Infinity>() : 0.0;
    const double dnorm = std::sqrt(dL.squaredNorm() + dR.squaredNorm());
    const double unorm = std::sqrt(rep.base.U_L.squaredNorm() + rep.base.U_R.squaredNorm());
    rep.velocity_change = unorm > 0.0 ? dnorm / unorm : dnorm;

    Vector php = project_p0(mesh, psi.psi);
    Vector areas(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        areas(t) = mesh.areas()[t];
    }
    php.array() -= php.dot(areas) / areas.sum();
    const Vector mismatch = rep.perturbed.P - rep.base.P - php;
    const double scale = php.lpNorm<Eigen::Infinity>();
    rep.pressure_mismatch = mismatch.lpNorm<Eigen::Infinity>() / (scale > 0.0 ? scale : 1.0);
    return rep;
}

void write_csv(const std::vector<ErrorReport>& reports, std::ostream& out)
{
    out << "n,h,h1_u,l2_u,l2_p,max_div,eoc_h1,eoc_l2u,eoc_l2p\n";
    for (const auto& r : reports) {
        out << r.n << ',' << format_double(r.h) << ',' << format_double(r.h1_u) << ','
            << format_double(r.l2_u) << ',' << format_double(r.l2_p) << ',' << format_double(r.max_div)
            << ',' << format_double(r.eoc_h1) << ',' << format_double(r.eoc_l2u) << ','
            << format_double(r.eoc_l2p) << '\n';
    }
}

void write_vtk(const Mesh& mesh, const DofMap& dofs, const Solution& sol, std::ostream& out)
{
    const int nv = mesh.num_vertices();
    const int nt = mesh.num_triangles();

    // RT0 and bubble parts are discontinuous at vertices; average over the incident triangles.
    std::vector<Point> vertex_velocity(static_cast<std::size_t>(nv), Point::Zero());
    std::vector<int> incident(static_cast<std::size_t>(nv), 0);
    std::vector<Point> cell_velocity(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
        const TriangleGeometry tri = triangle_geometry(mesh.triangle_points(t));
        const auto& vt = mesh.triangles()[t];
        for (int i = 0; i < 3; ++i) {
            std::array<double, 3> bary{0.0, 0.0, 0.0};
            bary[i] = 1.0;
            vertex_velocity[vt[i]] += evaluate_velocity(mesh, dofs, sol, t, tri, bary).value;
            ++incident[vt[i]];
        }
        cell_velocity[t] = evaluate_velocity(mesh, dofs, sol, t, tri, {1.0 / 3, 1.0 / 3, 1.0 / 3}).value;
    }

    char buf[96];
    out << "# vtk DataFile Version 3.0\n";
    out << "Stokes velocity and pressure (" << to_string(sol.scheme) << ")\n";
    out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nv << " double\n";
    for (const auto& v : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", v.x(), v.y());
        out << buf;
    }
    out << "CELLS " << nt << ' ' << 4 * nt << '\n';
    for (const auto& t : mesh.triangles()) {
        out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    out << "CELL_TYPES " << nt << '\n';
    for (int t = 0; t < nt; ++t) {
        out << "5\n";
    }
    out << "POINT_DATA " << nv << '\n';
    out << "VECTORS velocity double\n";
    for (int v = 0; v < nv; ++v) {
        const Point u = incident[v] ? Point(vertex_velocity[v] / incident[v]) : Point::Zero();
        std::snprintf(buf, sizeof buf, "%.12e %.12e 0\n", u.x(), u.y());
        out << buf;
    }
    out << "CELL_DATA " << nt << '\n';
    out << "VECTORS cell_velocity double\n";
    for (const auto& u : cell_velocity) {
        std::snprintf(buf, sizeof buf, "%.12e %.12e 0\n", u.x(), u.y());
        out << buf;
    }
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < nt; ++t) {
        std::snprintf(buf, sizeof buf, "%.12e\n", sol.P(t));
        out << buf;
    }
}

}  // namespace hdiv_stokes
