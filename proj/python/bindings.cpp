#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hdiv_stokes/condensation.hpp"
#include "hdiv_stokes/harness.hpp"
#include "hdiv_stokes/interp.hpp"

namespace py = pybind11;
namespace hs = hdiv_stokes;

namespace {

py::array_t<double> vertex_array(const hs::Mesh& m)
{
    py::array_t<double> out({m.num_vertices(), 2});
    auto v = out.mutable_unchecked<2>();
    for (int i = 0; i < m.num_vertices(); ++i) {
        v(i, 0) = m.vertices()[i].x();
        v(i, 1) = m.vertices()[i].y();
    }
    return out;
}

template <std::size_t N>
py::array_t<int> index_array(const std::vector<std::array<int, N>>& rows)
{
    py::array_t<int> out({static_cast<py::ssize_t>(rows.size()), static_cast<py::ssize_t>(N)});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            v(i, j) = rows[i][j];
        }
    }
    return out;
}

hs::Mesh mesh_from_arrays(py::array_t<double, py::array::c_style | py::array::forcecast> vertices,
                          py::array_t<int, py::array::c_style | py::array::forcecast> triangles)
{
    if (vertices.ndim() != 2 || vertices.shape(1) != 2 || triangles.ndim() != 2 || triangles.shape(1) != 3) {
        throw std::invalid_argument("expected vertices of shape (V, 2) and triangles of shape (F, 3)");
    }
    std::vector<hs::Point> pts(vertices.shape(0));
    auto v = vertices.unchecked<2>();
    for (py::ssize_t i = 0; i < vertices.shape(0); ++i) {
        pts[i] = hs::Point(v(i, 0), v(i, 1));
    }
    std::vector<std::array<int, 3>> tris(triangles.shape(0));
    auto t = triangles.unchecked<2>();
    for (py::ssize_t i = 0; i < triangles.shape(0); ++i) {
        tris[i] = {t(i, 0), t(i, 1), t(i, 2)};
    }
    return hs::build_topology(pts, tris);
}

hs::SolveConfig make_config(double nu, const std::string& scheme, const std::optional<std::string>& stab, double alpha)
{
    hs::SolveConfig cfg;
    cfg.nu = nu;
    cfg.method = hs::parse_method(scheme);
    if (cfg.method == hs::Method::BernardiRaugel) {
        if (stab) {
            throw std::invalid_argument("the Bernardi-Raugel scheme takes no stabilization");
        }
        cfg.stab.reset();
    } else {
        cfg.stab->kind = hs::parse_stab(stab.value_or("jd"));
        cfg.stab->alpha = alpha;
    }
    return cfg;
}

// Python callables receive the point as an (x, y) tuple and return two numbers.
hs::VectorField python_field(const py::object& f)
{
    return [f](const hs::Point& x) {
        const auto v = f(py::make_tuple(x.x(), x.y())).cast<std::array<double, 2>>();
        return hs::Point(v[0], v[1]);
    };
}

py::dict report_dict(const hs::ErrorReport& r)
{
    py::dict d;
    d["n"] = r.n;
    d["h"] = r.h;
    d["h1_u"] = r.h1_u;
    d["l2_u"] = r.l2_u;
    d["l2_p"] = r.l2_p;
    d["max_div"] = r.max_div;
    d["eoc_h1"] = r.eoc_h1;
    d["eoc_l2u"] = r.eoc_l2u;
    d["eoc_l2p"] = r.eoc_l2p;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Divergence-free P1c + RT0 - P0 Stokes solver";

    py::register_exception<hs::MeshError>(m, "MeshError", PyExc_ValueError);
    py::register_exception<hs::SolveError>(m, "SolveError", PyExc_RuntimeError);

    py::class_<hs::Mesh>(m, "Mesh")
        .def_property_readonly("num_vertices", &hs::Mesh::num_vertices)
        .def_property_readonly("num_triangles", &hs::Mesh::num_triangles)
        .def_property_readonly("num_edges", &hs::Mesh::num_edges)
        .def_property_readonly("vertices", &vertex_array)
        .def_property_readonly("triangles", [](const hs::Mesh& mesh) { return index_array(mesh.triangles()); })
        .def_property_readonly("edges", [](const hs::Mesh& mesh) { return index_array(mesh.edges()); })
        .def_property_readonly("areas", [](const hs::Mesh& mesh) {
            return py::array_t<double>(static_cast<py::ssize_t>(mesh.areas().size()), mesh.areas().data());
        })
        .def("__repr__", [](const hs::Mesh& mesh) {
            std::ostringstream s;
            s << "<Mesh V=" << mesh.num_vertices() << " E=" << mesh.num_edges() << " F=" << mesh.num_triangles()
              << ">";
            return s.str();
        });

    m.def("generate_structured", &hs::generate_structured, py::arg("n"),
          "Unit square split into n x n squares, each cut along its rising diagonal.");
    m.def("mesh_from_arrays", &mesh_from_arrays, py::arg("vertices"), py::arg("triangles"));
    m.def("read_mesh", [](const std::string& path) { return hs::read_mesh_file(path); }, py::arg("path"));

    py::class_<hs::DofMap>(m, "DofMap")
        .def_readonly("n1", &hs::DofMap::n1)
        .def_readonly("nR", &hs::DofMap::nR)
        .def_readonly("nP", &hs::DofMap::nP)
        .def_readonly("vertex_dof", &hs::DofMap::vertex_dof)
        .def_readonly("edge_dof", &hs::DofMap::edge_dof);
    m.def("build_dofmap", &hs::build_dofmap, py::arg("mesh"));

    py::class_<hs::QuadratureRule>(m, "QuadratureRule")
        .def_readonly("points", &hs::QuadratureRule::points)
        .def_readonly("weights", &hs::QuadratureRule::weights)
        .def_readonly("exactness", &hs::QuadratureRule::exactness);
    m.def("quadrature", &hs::quadrature, py::arg("exactness"));

    py::class_<hs::Solution>(m, "Solution")
        .def_readonly("U_L", &hs::Solution::U_L)
        .def_readonly("U_R", &hs::Solution::U_R)
        .def_readonly("P", &hs::Solution::P)
        .def_readonly("multiplier", &hs::Solution::multiplier)
        .def_readonly("relative_residual", &hs::Solution::relative_residual);

    py::class_<hs::ManufacturedCase>(m, "ManufacturedCase")
        .def_readonly("nu", &hs::ManufacturedCase::nu)
        .def("velocity", [](const hs::ManufacturedCase& c, double x, double y) { return c.velocity({x, y}); })
        .def("pressure", [](const hs::ManufacturedCase& c, double x, double y) { return c.pressure({x, y}); })
        .def("force", [](const hs::ManufacturedCase& c, double x, double y) { return c.force({x, y}); });
    m.def("vortex_case", &hs::vortex_case, py::arg("nu"), "The vortex benchmark with cubic pressure.");

    m.def(
        "solve",
        [](const hs::Mesh& mesh, double nu, const std::string& scheme, const std::optional<std::string>& stab,
           double alpha, const py::object& force) {
            const hs::SolveConfig cfg = make_config(nu, scheme, stab, alpha);
            if (!force.is_none()) {
                return hs::run_method(mesh, hs::build_dofmap(mesh), python_field(force), cfg);
            }
            const hs::VectorField f = hs::vortex_case(nu).force;
            py::gil_scoped_release release;
            return hs::run_method(mesh, hs::build_dofmap(mesh), f, cfg);
        },
        py::arg("mesh"), py::arg("nu") = 1e-6, py::arg("scheme") = "full", py::arg("stab") = py::none(),
        py::arg("alpha") = 1.0, py::arg("force") = py::none(),
        "Solve on `mesh`; `force(x)` takes a 2-vector and defaults to the benchmark forcing for `nu`.");

    m.def(
        "errors",
        [](const hs::Mesh& mesh, const hs::Solution& sol, double nu) {
            return report_dict(hs::compute_errors(mesh, hs::build_dofmap(mesh), sol, hs::vortex_case(nu)));
        },
        py::arg("mesh"), py::arg("solution"), py::arg("nu"));

    m.def(
        "divergence_check",
        [](const hs::Mesh& mesh, const hs::Solution& sol) {
            const hs::DivergenceReport r = hs::divergence_check(mesh, hs::build_dofmap(mesh), sol);
            py::dict d;
            d["max_mean"] = r.max_mean;
            d["max_pointwise"] = r.max_pointwise;
            d["max_velocity"] = r.max_velocity;
            return d;
        },
        py::arg("mesh"), py::arg("solution"));

    m.def(
        "convergence_study",
        [](const std::vector<int>& levels, double nu, const std::string& scheme,
           const std::optional<std::string>& stab, double alpha) {
            const hs::SolveConfig cfg = make_config(nu, scheme, stab, alpha);
            hs::ConvergenceResult res;
            {
                py::gil_scoped_release release;
                res = hs::convergence_study(levels, cfg);
            }
            if (!res.complete) {
                throw hs::SolveError(res.failure, std::numeric_limits<double>::infinity());
            }
            py::list out;
            for (const auto& r : res.reports) {
                out.append(report_dict(r));
            }
            return out;
        },
        py::arg("levels"), py::arg("nu") = 1e-6, py::arg("scheme") = "full", py::arg("stab") = py::none(),
        py::arg("alpha") = 1.0);

    m.def(
        "robustness_test",
        [](const hs::Mesh& mesh, const std::string& psi, double nu, const std::string& scheme) {
            const hs::RobustnessReport r = hs::robustness_test(mesh, make_config(nu, scheme, std::nullopt, 1.0),
                                                               hs::vortex_case(nu).force, hs::make_perturbation(psi));
            py::dict d;
            d["velocity_change"] = r.velocity_change;
            d["pressure_mismatch"] = r.pressure_mismatch;
            d["base"] = r.base;
            d["perturbed"] = r.perturbed;
            return d;
        },
        py::arg("mesh"), py::arg("psi") = "x", py::arg("nu") = 1e-6, py::arg("scheme") = "full");

    m.def(
        "fortin",
        [](const hs::Mesh& mesh, const py::object& v) {
            const hs::FortinInterpolant pi = hs::fortin(mesh, hs::build_dofmap(mesh), python_field(v));
            return py::make_tuple(pi.U_L, pi.U_R);
        },
        py::arg("mesh"), py::arg("velocity"), "Returns the (U_L, U_R) coefficients of the interpolant.");

    m.def(
        "project_p0",
        [](const hs::Mesh& mesh, const py::object& q) {
            return hs::project_p0(mesh, [q](const hs::Point& x) { return q(py::make_tuple(x.x(), x.y())).cast<double>(); });
        },
        py::arg("mesh"), py::arg("q"));

    m.def(
        "assemble",
        [](const hs::Mesh& mesh, double nu, const std::string& scheme, const std::optional<std::string>& stab) {
            const hs::SolveConfig cfg = make_config(nu, scheme, stab, 1.0);
            const hs::Scheme s = cfg.method == hs::Method::BernardiRaugel ? hs::Scheme::BernardiRaugel
                                 : cfg.method == hs::Method::Full          ? hs::Scheme::Full
                                                                           : hs::Scheme::Perturbed;
            const hs::GlobalSystem g =
                hs::to_global(hs::assemble_system(mesh, hs::build_dofmap(mesh), cfg.stab, nu, hs::vortex_case(nu).force, s));
            return py::make_tuple(g.matrix, g.rhs);
        },
        py::arg("mesh"), py::arg("nu") = 1e-6, py::arg("scheme") = "full", py::arg("stab") = py::none(),
        "Global bordered matrix (scipy.sparse) and right-hand side for the benchmark forcing.");
}
