#include "pstokes/mesh.hpp"

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace pstokes {

namespace {

bool on_boundary(const Point& p) {
    return p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
}

}  // namespace

MeshPtr Mesh::build_grid(int n) {
    if (n < 1) {
        throw std::invalid_argument("build_grid: n must be >= 1, got " + std::to_string(n));
    }
    auto mesh = std::shared_ptr<Mesh>(new Mesh());
    mesh->n_ = n;

    const int np = n + 1;
    mesh->vertices_.reserve(static_cast<std::size_t>(np) * np);
    mesh->boundary_vertex_.reserve(static_cast<std::size_t>(np) * np);
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
            // i == n gives exactly 1.0, keeping boundary detection exact.
            const Point p{i == n ? 1.0 : static_cast<double>(i) / n,
                          j == n ? 1.0 : static_cast<double>(j) / n};
            mesh->vertices_.push_back(p);
            mesh->boundary_vertex_.push_back(on_boundary(p));
        }
    }

    mesh->triangles_.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int sw = j * np + i;
            const int se = sw + 1;
            const int nw = sw + np;
            const int ne = nw + 1;
            mesh->triangles_.push_back({sw, se, ne});
            mesh->triangles_.push_back({sw, ne, nw});
        }
    }

    // Edges numbered by first appearance in the triangle sweep.
    std::map<std::pair<int, int>, int> index;
    mesh->triangle_edges_.reserve(mesh->triangles_.size());
    for (const auto& tri : mesh->triangles_) {
        std::array<int, 3> te{};
        for (int k = 0; k < 3; ++k) {
            int a = tri[k];
            int b = tri[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            auto [it, inserted] = index.try_emplace({a, b}, static_cast<int>(mesh->edges_.size()));
            if (inserted) mesh->edges_.push_back({a, b});
            te[k] = it->second;
        }
        mesh->triangle_edges_.push_back(te);
    }

    mesh->boundary_edge_.reserve(mesh->edges_.size());
    for (std::size_t e = 0; e < mesh->edges_.size(); ++e) {
        mesh->boundary_edge_.push_back(on_boundary(mesh->edge_midpoint(e)));
    }
    return mesh;
}

Point Mesh::edge_midpoint(std::size_t e) const {
    const auto& a = vertices_[edges_[e][0]];
    const auto& b = vertices_[edges_[e][1]];
    return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
}

double Mesh::signed_area(std::size_t t) const {
    const auto& a = vertices_[triangles_[t][0]];
    const auto& b = vertices_[triangles_[t][1]];
    const auto& c = vertices_[triangles_[t][2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

void Mesh::write(std::ostream& os) const {
    os << num_vertices() << ' ' << num_triangles() << '\n';
    const auto old_precision = os.precision(17);
    for (const auto& v : vertices_) os << v[0] << ' ' << v[1] << '\n';
    os.precision(old_precision);
    for (const auto& t : triangles_) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace pstokes
