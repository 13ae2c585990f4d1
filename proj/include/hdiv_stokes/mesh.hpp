#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hdiv_stokes {

using Point = Eigen::Vector2d;

/// Raised when a triangle list does not describe a conforming, non-degenerate
/// 2D triangulation.
class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Oriented reference from a triangle to one of its edges.
///
/// `sign` is +1 when the global edge normal points out of the triangle.
struct EdgeRef {
    int edge = -1;
    int sign = 0;
};

/// Conforming triangulation with edge topology and geometric caches.
///
/// Local edge `i` of a triangle is the edge opposite its local vertex `i`.
/// Each global edge stores `(lo, hi)` with `lo < hi`; its unit normal is the
/// clockwise rotation of the `lo -> hi` direction. Immutable once built.
class Mesh {
public:
    Mesh() = default;

    [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles_.size()); }
    [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }
    [[nodiscard]] int num_interior_edges() const;
    [[nodiscard]] int num_interior_vertices() const;

    [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
    [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    [[nodiscard]] const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    [[nodiscard]] const std::vector<std::array<EdgeRef, 3>>& tri_edges() const { return tri_edges_; }
    /// Triangles adjacent to each edge; the second entry is -1 on the boundary.
    [[nodiscard]] const std::vector<std::array<int, 2>>& edge_triangles() const { return edge_triangles_; }
    [[nodiscard]] const std::vector<bool>& edge_boundary() const { return edge_boundary_; }
    [[nodiscard]] const std::vector<bool>& vertex_boundary() const { return vertex_boundary_; }

    [[nodiscard]] const std::vector<double>& areas() const { return areas_; }
    [[nodiscard]] const std::vector<double>& diameters() const { return diameters_; }
    [[nodiscard]] const std::vector<double>& edge_lengths() const { return edge_lengths_; }
    [[nodiscard]] const std::vector<Point>& edge_normals() const { return edge_normals_; }

    [[nodiscard]] std::array<Point, 3> triangle_points(int t) const;

    friend Mesh build_topology(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles);

private:
    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<EdgeRef, 3>> tri_edges_;
    std::vector<std::array<int, 2>> edge_triangles_;
    std::vector<bool> edge_boundary_;
    std::vector<bool> vertex_boundary_;
    std::vector<double> areas_;
    std::vector<double> diameters_;
    std::vector<double> edge_lengths_;
    std::vector<Point> edge_normals_;
};

/// Builds edges, orientation signs, boundary flags and geometry.
///
/// Clockwise triangles are reordered counter-clockwise. Throws MeshError for
/// invalid vertex indices, zero-area or duplicate triangles, edges shared by
/// more than two triangles, and hanging vertices (T-junctions).
Mesh build_topology(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles);

/// Uniform n x n grid on the unit square, each cell split along its
/// lower-left to upper-right diagonal.
Mesh generate_structured(int n);

struct ShapeMetrics {
    double h = 0.0;                 ///< max_T h_T
    double min_angle_deg = 0.0;
    double shape_indicator = 0.0;   ///< max_T h_T / min_T inradius
};

ShapeMetrics shape_metrics(const Mesh& mesh);

/// Plain-text mesh format: header `V E F` (E ignored on read), V lines `x y`,
/// F lines `i j k` with 0-based indices. Lines starting with `#` are comments.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

}  // namespace hdiv_stokes
