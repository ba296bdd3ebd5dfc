#include <map>
#include <sstream>

#include "doctest.h"
#include "pstokes/mesh.hpp"

using namespace pstokes;

TEST_SUITE("mesh") {

TEST_CASE("two-by-two grid counts") {
    const auto m = build_grid(2);
    CHECK(m->num_vertices() == 9);
    CHECK(m->num_triangles() == 8);
    int boundary = 0;
    for (bool b : m->boundary_vertex_flags()) boundary += b;
    CHECK(boundary == 8);
    CHECK_FALSE(m->boundary_vertex_flags()[4]);
    CHECK(m->vertices()[4] == Point{0.5, 0.5});
}

TEST_CASE("mesh size is the cell side") {
    CHECK(build_grid(10)->mesh_size() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(build_grid(20)->mesh_size() == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(build_grid(160)->mesh_size() == doctest::Approx(0.00625).epsilon(1e-15));
    CHECK(build_grid(1)->mesh_size() == 1.0);
}

TEST_CASE("non-positive sizes are rejected") {
    CHECK_THROWS_AS(build_grid(0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(-3), std::invalid_argument);
}

TEST_CASE("areas are positive and tile the unit square") {
    for (int n : {1, 2, 3, 7, 20, 64}) {
        const auto m = build_grid(n);
        double total = 0.0;
        for (std::size_t t = 0; t < m->num_triangles(); ++t) {
            CHECK(m->signed_area(t) > 0.0);
            total += m->signed_area(t);
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("edge incidence") {
    for (int n : {1, 2, 5, 12}) {
        const auto m = build_grid(n);
        CHECK(m->num_edges() == static_cast<std::size_t>(3 * n * n + 2 * n));
        std::vector<int> count(m->num_edges(), 0);
        for (const auto& te : m->triangle_edges()) {
            for (int e : te) ++count[e];
        }
        for (std::size_t e = 0; e < m->num_edges(); ++e) {
            CHECK(count[e] == (m->boundary_edge_flags()[e] ? 1 : 2));
        }
        // Local edge k joins local vertices k and k+1.
        for (std::size_t t = 0; t < m->num_triangles(); ++t) {
            for (int k = 0; k < 3; ++k) {
                const auto& ed = m->edges()[m->triangle_edges()[t][k]];
                const int a = m->triangles()[t][k], b = m->triangles()[t][(k + 1) % 3];
                CHECK(ed[0] == std::min(a, b));
                CHECK(ed[1] == std::max(a, b));
            }
        }
    }
}

TEST_CASE("every cell is split along its SW-NE diagonal") {
    const int n = 5;
    const auto m = build_grid(n);
    std::map<std::pair<int, int>, int> diag_hits;
    for (const auto& tri : m->triangles()) {
        double cx = 0.0, cy = 0.0;
        for (int v : tri) {
            cx += m->vertices()[v][0] / 3.0;
            cy += m->vertices()[v][1] / 3.0;
        }
        const int i = static_cast<int>(cx * n), j = static_cast<int>(cy * n);
        const int sw = j * (n + 1) + i, ne = (j + 1) * (n + 1) + i + 1;
        bool has_sw = false, has_ne = false;
        for (int v : tri) {
            has_sw |= v == sw;
            has_ne |= v == ne;
        }
        CHECK(has_sw);
        CHECK(has_ne);
        ++diag_hits[{i, j}];
    }
    CHECK(diag_hits.size() == static_cast<std::size_t>(n * n));
    for (const auto& [cell, k] : diag_hits) CHECK(k == 2);
}

TEST_CASE("regeneration is bit-identical") {
    const auto a = build_grid(9), b = build_grid(9);
    CHECK(a->vertices() == b->vertices());
    CHECK(a->triangles() == b->triangles());
    CHECK(a->edges() == b->edges());
}

TEST_CASE("text dump layout") {
    std::ostringstream os;
    build_grid(2)->write(os);
    std::istringstream in(os.str());
    int nv = 0, nt = 0;
    in >> nv >> nt;
    CHECK(nv == 9);
    CHECK(nt == 8);
    double x = 0, y = 0;
    for (int i = 0; i < nv; ++i) in >> x >> y;
    CHECK(x == 1.0);
    CHECK(y == 1.0);
    int a = 0, b = 0, c = 0;
    for (int i = 0; i < nt; ++i) in >> a >> b >> c;
    CHECK(in);
    CHECK(c >= 0);
}

}
