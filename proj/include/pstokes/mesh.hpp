#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

namespace pstokes {

using Point = std::array<double, 2>;

/// Structured triangulation of the unit square.
///
/// Each cell [i/n,(i+1)/n] x [j/n,(j+1)/n] is cut by its SW-NE diagonal:
///
///     NW +------+ NE
///        |    / |
///        | B /  |      A = (SW, SE, NE)
///        |  /   |      B = (SW, NE, NW)
///        | /  A |
///     SW +------+ SE
///
/// Vertex (i, j) has index j*(n+1) + i. Triangles are stored cell by cell in
/// row-major order (A before B), all counterclockwise.
class Mesh {
public:
    static std::shared_ptr<const Mesh> build_grid(int n);

    int n() const { return n_; }
    /// Cell side 1/n. Triangle diameters are sqrt(2)/n.
    double mesh_size() const { return 1.0 / n_; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_triangles() const { return triangles_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<bool>& boundary_vertex_flags() const { return boundary_vertex_; }

    /// Unique edges as (lo, hi) vertex pairs.
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    /// Edge k of a triangle joins its local vertices k and (k+1)%3.
    const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
    /// True when the edge lies on the boundary of the unit square.
    const std::vector<bool>& boundary_edge_flags() const { return boundary_edge_; }

    Point edge_midpoint(std::size_t e) const;
    double signed_area(std::size_t t) const;

    /// Plain-text dump: "nv nt", then "x y" per vertex, then "i j k" per triangle.
    void write(std::ostream& os) const;

private:
    Mesh() = default;

    int n_ = 0;
    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<bool> boundary_vertex_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 3>> triangle_edges_;
    std::vector<bool> boundary_edge_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

inline MeshPtr build_grid(int n) { return Mesh::build_grid(n); }

}  // namespace pstokes
