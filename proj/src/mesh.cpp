#include "hdiv_stokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace hdiv_stokes {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c)
{
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

// True when p lies strictly inside the segment [a, b].
bool strictly_inside_segment(const Point& p, const Point& a, const Point& b)
{
    const Point ab = b - a;
    const double len2 = ab.squaredNorm();
    const double cross = ab.x() * (p.y() - a.y()) - ab.y() * (p.x() - a.x());
    if (std::abs(cross) > 1e-12 * len2) {
        return false;
    }
    const double t = ab.dot(p - a) / len2;
    return t > 1e-12 && t < 1.0 - 1e-12;
}

}  // namespace

int Mesh::num_interior_edges() const
{
    return static_cast<int>(std::count(edge_boundary_.begin(), edge_boundary_.end(), false));
}

int Mesh::num_interior_vertices() const
{
    return static_cast<int>(std::count(vertex_boundary_.begin(), vertex_boundary_.end(), false));
}

std::array<Point, 3> Mesh::triangle_points(int t) const
{
    const auto& tri = triangles_[static_cast<std::size_t>(t)];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

Mesh build_topology(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles)
{
    const int nv = static_cast<int>(vertices.size());
    Mesh mesh;

    std::set<std::array<int, 3>> seen;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        auto& tri = triangles[t];
        for (int v : tri) {
            if (v < 0 || v >= nv) {
                throw MeshError("triangle " + std::to_string(t) + " references vertex " +
                                std::to_string(v) + " outside [0, " + std::to_string(nv) + ")");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
        }
        const double area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        const double scale = std::max({(vertices[tri[1]] - vertices[tri[0]]).squaredNorm(),
                                       (vertices[tri[2]] - vertices[tri[1]]).squaredNorm(),
                                       (vertices[tri[0]] - vertices[tri[2]]).squaredNorm()});
        if (std::abs(area) <= 1e-14 * scale) {
            throw MeshError("triangle " + std::to_string(t) + " has zero area");
        }
        if (area < 0.0) {
            std::swap(tri[1], tri[2]);
        }
        auto key = tri;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) {
            throw MeshError("duplicate triangle " + std::to_string(t));
        }
    }

    std::map<std::pair<int, int>, int> edge_index;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 2>> edge_tris;
    std::vector<std::array<int, 3>> local_edges(triangles.size());

    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (int i = 0; i < 3; ++i) {
            int a = tri[(i + 1) % 3];
            int b = tri[(i + 2) % 3];
            if (a > b) {
                std::swap(a, b);
            }
            auto [it, inserted] = edge_index.try_emplace({a, b}, static_cast<int>(edges.size()));
            if (inserted) {
                edges.push_back({a, b});
                edge_tris.push_back({static_cast<int>(t), -1});
            } else {
                auto& adj = edge_tris[static_cast<std::size_t>(it->second)];
                if (adj[1] != -1) {
                    throw MeshError("non-manifold edge (" + std::to_string(a) + ", " +
                                    std::to_string(b) + ") shared by more than two triangles");
                }
                adj[1] = static_cast<int>(t);
            }
            local_edges[t][static_cast<std::size_t>(i)] = it->second;
        }
    }

    const std::size_t ne = edges.size();
    mesh.edge_boundary_.assign(ne, false);
    mesh.vertex_boundary_.assign(static_cast<std::size_t>(nv), false);
    mesh.edge_lengths_.resize(ne);
    mesh.edge_normals_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const Point d = vertices[edges[e][1]] - vertices[edges[e][0]];
        mesh.edge_lengths_[e] = d.norm();
        mesh.edge_normals_[e] = Point(d.y(), -d.x()) / mesh.edge_lengths_[e];
        if (edge_tris[e][1] == -1) {
            mesh.edge_boundary_[e] = true;
            mesh.vertex_boundary_[edges[e][0]] = true;
            mesh.vertex_boundary_[edges[e][1]] = true;
        }
    }

    // A hanging vertex shows up as a vertex lying inside a one-sided edge.
    for (std::size_t e = 0; e < ne; ++e) {
        if (!mesh.edge_boundary_[e]) {
            continue;
        }
        const Point& a = vertices[edges[e][0]];
        const Point& b = vertices[edges[e][1]];
        for (int v = 0; v < nv; ++v) {
            if (v != edges[e][0] && v != edges[e][1] && mesh.vertex_boundary_[v] &&
                strictly_inside_segment(vertices[v], a, b)) {
                throw MeshError("non-conforming mesh: vertex " + std::to_string(v) +
                                " lies inside edge (" + std::to_string(edges[e][0]) + ", " +
                                std::to_string(edges[e][1]) + ")");
            }
        }
    }

    const std::size_t nt = triangles.size();
    mesh.tri_edges_.resize(nt);
    mesh.areas_.resize(nt);
    mesh.diameters_.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = triangles[t];
        mesh.areas_[t] = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        double diam = 0.0;
        for (int i = 0; i < 3; ++i) {
            const int e = local_edges[t][static_cast<std::size_t>(i)];
            const Point mid = 0.5 * (vertices[edges[e][0]] + vertices[edges[e][1]]);
            const double outward = mesh.edge_normals_[e].dot(mid - vertices[tri[i]]);
            mesh.tri_edges_[t][static_cast<std::size_t>(i)] = {e, outward > 0.0 ? 1 : -1};
            diam = std::max(diam, mesh.edge_lengths_[e]);
        }
        mesh.diameters_[t] = diam;
    }

    mesh.vertices_ = std::move(vertices);
    mesh.triangles_ = std::move(triangles);
    mesh.edges_ = std::move(edges);
    mesh.edge_triangles_ = std::move(edge_tris);
    return mesh;
}

Mesh generate_structured(int n)
{
    if (n < 1) {
        throw MeshError("structured mesh needs n >= 1, got " + std::to_string(n));
    }
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
        }
    }
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return build_topology(std::move(vertices), std::move(triangles));
}

ShapeMetrics shape_metrics(const Mesh& mesh)
{
    ShapeMetrics m;
    m.min_angle_deg = 180.0;
    double min_inradius = std::numeric_limits<double>::infinity();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto p = mesh.triangle_points(t);
        double perimeter = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Point u = p[(i + 1) % 3] - p[i];
            const Point w = p[(i + 2) % 3] - p[i];
            const double c = std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0);
            m.min_angle_deg = std::min(m.min_angle_deg, std::acos(c) * 180.0 / std::numbers::pi);
            perimeter += u.norm();
        }
        min_inradius = std::min(min_inradius, 2.0 * mesh.areas()[t] / perimeter);
        m.h = std::max(m.h, mesh.diameters()[t]);
    }
    m.shape_indicator = m.h / min_inradius;
    return m;
}

Mesh read_mesh(std::istream& in)
{
    std::string line;
    auto next_line = [&]() -> std::istringstream {
        while (std::getline(in, line)) {
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') {
                continue;
            }
            return std::istringstream(line);
        }
        throw MeshError("unexpected end of mesh file");
    };

    long nv = 0;
    long ignored = 0;
    long nf = 0;
    if (auto header = next_line(); !(header >> nv >> ignored >> nf) || nv < 3 || nf < 1) {
        throw MeshError("bad mesh header: '" + line + "'");
    }
    std::vector<Point> vertices(static_cast<std::size_t>(nv));
    for (auto& v : vertices) {
        if (auto ls = next_line(); !(ls >> v.x() >> v.y())) {
            throw MeshError("bad vertex line: '" + line + "'");
        }
    }
    std::vector<std::array<int, 3>> triangles(static_cast<std::size_t>(nf));
    for (auto& t : triangles) {
        if (auto ls = next_line(); !(ls >> t[0] >> t[1] >> t[2])) {
            throw MeshError("bad triangle line: '" + line + "'");
        }
    }
    return build_topology(std::move(vertices), std::move(triangles));
}

Mesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MeshError("cannot open mesh file " + path);
    }
    return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out)
{
    out << "# vertices edges triangles\n";
    out << mesh.num_vertices() << ' ' << mesh.num_edges() << ' ' << mesh.num_triangles() << '\n';
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices()) {
        out << v.x() << ' ' << v.y() << '\n';
    }
    for (const auto& t : mesh.triangles()) {
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
}

}  // namespace hdiv_stokes
