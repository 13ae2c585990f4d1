// Command-line front end: mesh generation, single solves, convergence studies,
// pressure-robustness checks and the Bernardi-Raugel comparison.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hdiv_stokes/harness.hpp"

namespace hs = hdiv_stokes;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitThreshold = 2;

struct CommonFlags {
    int n = 8;
    std::string mesh_file;
    double nu = 1e-6;
    std::string stab = "jd";
    double alpha = 1.0;
    std::string scheme = "full";
    CLI::Option* stab_opt = nullptr;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_mesh)
{
    auto* n = app->add_option("--n", f.n, "Cells per side of the structured unit-square mesh")
                  ->check(CLI::PositiveNumber);
    if (with_mesh) {
        app->add_option("--mesh", f.mesh_file, "Mesh file (V E F header, vertices, triangles)")
            ->check(CLI::ExistingFile)
            ->excludes(n);
    }
    app->add_option("--nu", f.nu, "Viscosity")->check(CLI::PositiveNumber);
    f.stab_opt = app->add_option("--stab", f.stab, "RT0 stabilization")->check(CLI::IsMember({"j0", "jd"}));
    app->add_option("--alpha", f.alpha, "Stabilization parameter")->check(CLI::PositiveNumber);
    app->add_option("--scheme", f.scheme, "Discretization")
        ->check(CLI::IsMember({"full", "condensed", "perturbed", "br"}));
}

hs::SolveConfig make_config(const CommonFlags& f)
{
    hs::SolveConfig cfg;
    cfg.nu = f.nu;
    cfg.method = hs::parse_method(f.scheme);
    if (cfg.method == hs::Method::BernardiRaugel) {
        if (f.stab_opt && f.stab_opt->count() > 0) {
            throw std::invalid_argument("--stab cannot be combined with --scheme br");
        }
        cfg.stab.reset();
    } else {
        hs::StabConfig stab;
        stab.kind = hs::parse_stab(f.stab);
        stab.alpha = f.alpha;
        cfg.stab = stab;
    }
    return cfg;
}

hs::Mesh load_mesh(const CommonFlags& f)
{
    return f.mesh_file.empty() ? hs::generate_structured(f.n) : hs::read_mesh_file(f.mesh_file);
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    return out;
}

std::string format_vector(const hs::Vector& v)
{
    std::ostringstream os;
    os << '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v(i) + 0.0);
        os << (i ? ", " : "") << buf;
    }
    os << ']';
    return os.str();
}

void print_report(const hs::ErrorReport& r)
{
    std::printf("  h1_u      = %.6e\n  l2_u      = %.6e\n  l2_p      = %.6e\n  max_div   = %.3e\n",
                r.h1_u, r.l2_u, r.l2_p, r.max_div);
}

bool orders_ok(const std::vector<hs::ErrorReport>& reports)
{
    if (reports.size() < 2) {
        return false;
    }
    bool ok = true;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const auto& r = reports[i];
        ok = ok && r.eoc_h1 >= 0.85 && r.eoc_h1 <= 1.15;
        ok = ok && r.eoc_l2u >= 1.8 && r.eoc_l2u <= 2.2;
        ok = ok && r.eoc_l2p >= 0.85;
    }
    return ok;
}

int run_solve(const CommonFlags& f, const std::string& vtk, const std::string& csv, const std::string& matrix)
{
    const hs::SolveConfig cfg = make_config(f);
    const hs::Mesh mesh = load_mesh(f);
    const hs::DofMap dofs = hs::build_dofmap(mesh);
    const hs::ManufacturedCase mc = hs::vortex_case(cfg.nu);

    std::printf("mesh: %d vertices, %d triangles, %d edges\n", mesh.num_vertices(), mesh.num_triangles(),
                mesh.num_edges());
    std::printf("dofs: n1=%d nR=%d nP=%d\n", dofs.n1, dofs.nR, dofs.nP);
    std::printf("scheme: %s", std::string(hs::to_string(cfg.method)).c_str());
    if (cfg.stab) {
        std::printf(", stab %s, alpha %g", std::string(hs::to_string(cfg.stab->kind)).c_str(), cfg.stab->alpha);
    }
    std::printf(", nu %g\n", cfg.nu);

    if (!matrix.empty()) {
        const hs::Scheme scheme = cfg.method == hs::Method::Full             ? hs::Scheme::Full
                                  : cfg.method == hs::Method::BernardiRaugel ? hs::Scheme::BernardiRaugel
                                                                             : hs::Scheme::Perturbed;
        auto out = open_out(matrix);
        hs::write_coordinate(hs::to_global(hs::assemble_system(mesh, dofs, cfg.stab, cfg.nu, mc.force, scheme)).matrix,
                             out);
    }

    const hs::Solution sol = hs::run_method(mesh, dofs, mc.force, cfg);
    std::printf("relative residual: %.3e\n", sol.relative_residual);
    if (sol.U_R.size() <= 16) {
        std::printf("U_R = %s\n", format_vector(sol.U_R).c_str());
    }
    hs::ErrorReport rep = hs::compute_errors(mesh, dofs, sol, mc);
    rep.n = f.mesh_file.empty() ? f.n : 0;
    std::printf("errors against the manufactured solution:\n");
    print_report(rep);

    if (!vtk.empty()) {
        auto out = open_out(vtk);
        hs::write_vtk(mesh, dofs, sol, out);
    }
    if (!csv.empty()) {
        auto out = open_out(csv);
        hs::write_csv({rep}, out);
    }
    return 0;
}

int run_convergence(const CommonFlags& f, const std::vector<int>& levels, const std::string& csv, bool check)
{
    const hs::SolveConfig cfg = make_config(f);
    const hs::ConvergenceResult res = hs::convergence_study(levels, cfg);
    hs::write_csv(res.reports, std::cout);
    if (!csv.empty()) {
        auto out = open_out(csv);
        hs::write_csv(res.reports, out);
    }
    if (!res.complete) {
        std::cerr << "convergence study incomplete: " << res.failure << '\n';
        return kExitFailure;
    }
    if (check && !orders_ok(res.reports)) {
        std::cerr << "observed orders outside the acceptance windows\n";
        return kExitThreshold;
    }
    return 0;
}

int run_robustness(const CommonFlags& f, const std::string& psi_name)
{
    const hs::SolveConfig cfg = make_config(f);
    const hs::Mesh mesh = load_mesh(f);
    const hs::ManufacturedCase mc = hs::vortex_case(cfg.nu);
    const hs::RobustnessReport rep = hs::robustness_test(mesh, cfg, mc.force, hs::make_perturbation(psi_name));
    std::printf("psi = %s\n", psi_name.c_str());
    std::printf("velocity delta (relative): %.3e\n", rep.velocity_change);
    std::printf("max |dU_L|: %.3e\nmax |dU_R|: %.3e\n", rep.velocity_change_L, rep.velocity_change_R);
    std::printf("pressure delta vs P_h psi (relative): %.3e\n", rep.pressure_mismatch);
    return 0;
}

int run_compare_br(int n, double nu, bool check)
{
    const hs::Mesh mesh = hs::generate_structured(n);
    const hs::DofMap dofs = hs::build_dofmap(mesh);
    const hs::ManufacturedCase mc = hs::vortex_case(nu);

    hs::SolveConfig compact;
    compact.nu = nu;
    hs::SolveConfig br;
    br.nu = nu;
    br.method = hs::Method::BernardiRaugel;
    br.stab.reset();

    const hs::ErrorReport ec = hs::compute_errors(mesh, dofs, hs::run_method(mesh, dofs, mc.force, compact), mc);
    const hs::ErrorReport eb = hs::compute_errors(mesh, dofs, hs::run_method(mesh, dofs, mc.force, br), mc);
    std::printf("n = %d, nu = %g\n", n, nu);
    std::printf("compact (full, jd):\n");
    print_report(ec);
    std::printf("bernardi-raugel:\n");
    print_report(eb);
    const double ratio = eb.h1_u / ec.h1_u;
    std::printf("velocity H1 error ratio (br / compact): %.3e\n", ratio);
    std::printf("velocity L2 error ratio (br / compact): %.3e\n", eb.l2_u / ec.l2_u);
    if (check && !(ratio >= 1e3)) {
        std::cerr << "ratio below 1e3\n";
        return kExitThreshold;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Divergence-free P1c + RT0 - P0 Stokes solver"};
    app.require_subcommand(1);

    CommonFlags solve_flags;
    std::string vtk;
    std::string csv;
    std::string matrix;
    auto* solve = app.add_subcommand("solve", "Solve the manufactured vortex problem on one mesh");
    add_common(solve, solve_flags, true);
    solve->add_option("--vtk", vtk, "Write the solution as VTK legacy unstructured grid");
    solve->add_option("--csv", csv, "Write the error report as CSV");
    solve->add_option("--export-matrix", matrix, "Write the global matrix as 'row col value' lines");

    CommonFlags conv_flags;
    std::vector<int> levels{8, 16, 32, 64};
    std::string conv_csv;
    bool conv_check = false;
    auto* conv = app.add_subcommand("convergence", "Convergence study on dyadic structured meshes");
    add_common(conv, conv_flags, false);
    conv->add_option("--levels", levels, "Comma-separated mesh levels")->delimiter(',')->check(CLI::PositiveNumber);
    conv->add_option("--csv", conv_csv, "Write the table as CSV");
    conv->add_flag("--check", conv_check, "Exit 2 if observed orders leave the acceptance windows");

    CommonFlags rob_flags;
    rob_flags.n = 16;
    std::string psi = "x";
    auto* rob = app.add_subcommand("robustness", "Perturb the forcing by grad psi and compare solutions");
    add_common(rob, rob_flags, true);
    rob->add_option("--psi", psi, "Gradient potential")->check(CLI::IsMember({"x", "cubic"}));

    int br_n = 32;
    double br_nu = 1e-6;
    bool br_check = false;
    auto* cmp = app.add_subcommand("compare-br", "Compare against the Bernardi-Raugel element");
    cmp->add_option("--n", br_n, "Cells per side")->check(CLI::PositiveNumber);
    cmp->add_option("--nu", br_nu, "Viscosity")->check(CLI::PositiveNumber);
    cmp->add_flag("--check", br_check, "Exit 2 if the H1 error ratio is below 1e3");

    int mesh_n = 8;
    std::string mesh_out;
    auto* mesh_cmd = app.add_subcommand("mesh", "Write a structured mesh");
    mesh_cmd->add_option("--n", mesh_n, "Cells per side")->check(CLI::PositiveNumber);
    mesh_cmd->add_option("--out", mesh_out, "Output file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kExitFailure;
    }

    try {
        if (*solve) {
            return run_solve(solve_flags, vtk, csv, matrix);
        }
        if (*conv) {
            return run_convergence(conv_flags, levels, conv_csv, conv_check);
        }
        if (*rob) {
            return run_robustness(rob_flags, psi);
        }
        if (*cmp) {
            return run_compare_br(br_n, br_nu, br_check);
        }
        if (*mesh_cmd) {
            const hs::Mesh mesh = hs::generate_structured(mesh_n);
            if (mesh_out.empty()) {
                hs::write_mesh(mesh, std::cout);
            } else {
                auto out = open_out(mesh_out);
                hs::write_mesh(mesh, out);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
