#include "pstokes/fe.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pstokes {

namespace {

constexpr std::array<Vec2, 3> kBaryGrad{{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}};
constexpr std::array<std::array<int, 2>, 3> kLocalEdges{{{0, 1}, {1, 2}, {2, 0}}};

QuadratureRule make_rule(int degree) {
    QuadratureRule rule;
    rule.degree = degree;
    auto add = [&rule](Bary b, double w) {
        rule.points.push_back(b);
        rule.weights.push_back(0.5 * w);
    };
    // (a, a, 1-2a) orbit
    auto add3 = [&add](double a, double w) {
        const double b = 1.0 - 2.0 * a;
        add({b, a, a}, w);
        add({a, b, a}, w);
        add({a, a, b}, w);
    };
    // (a, b, c) orbit, all permutations
    auto add6 = [&add](double a, double b, double w) {
        const double c = 1.0 - a - b;
        add({a, b, c}, w);
        add({a, c, b}, w);
        add({b, a, c}, w);
        add({b, c, a}, w);
        add({c, a, b}, w);
        add({c, b, a}, w);
    };
    switch (degree) {
        case 2:
            add({0.5, 0.5, 0.0}, 1.0 / 3.0);
            add({0.0, 0.5, 0.5}, 1.0 / 3.0);
            add({0.5, 0.0, 0.5}, 1.0 / 3.0);
            break;
        case 4:
            add3(0.445948490915964886318329253883, 0.223381589678011465944827195716);
            add3(0.091576213509770743459571463402, 0.109951743655321867388506137617);
            break;
        case 6:
            add3(0.249286745170910421291638553107, 0.116786275726379366030690538687);
            add3(0.063089014491502228340331602870, 0.050844906370206816920936809106);
            add6(0.053145049844816947353249671631, 0.310352451033784405416607733956,
                 0.082851075618373575193553456421);
            break;
        default:
            throw std::invalid_argument("quadrature: unsupported degree " + std::to_string(degree) +
                                        " (supported: 2, 4, 6)");
    }
    return rule;
}

}  // namespace

ReferenceElement::ReferenceElement(int degree) : degree_(degree) {
    if (degree != 1 && degree != 2) {
        throw std::invalid_argument("ReferenceElement: degree must be 1 or 2, got " + std::to_string(degree));
    }
    nodes_ = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    if (degree == 2) {
        for (const auto& [i, j] : kLocalEdges) {
            Bary b{0.0, 0.0, 0.0};
            b[i] = 0.5;
            b[j] = 0.5;
            nodes_.push_back(b);
        }
    }
}

void ReferenceElement::eval(const Bary& p, std::span<double> values, std::span<Vec2> gradients) const {
    if (std::abs(p[0] + p[1] + p[2] - 1.0) > 1e-12) {
        throw std::invalid_argument("ReferenceElement::eval: barycentric coordinates must sum to 1");
    }
    if (degree_ == 1) {
        for (int i = 0; i < 3; ++i) {
            values[i] = p[i];
            gradients[i] = kBaryGrad[i];
        }
        return;
    }
    for (int i = 0; i < 3; ++i) {
        values[i] = p[i] * (2.0 * p[i] - 1.0);
        const double s = 4.0 * p[i] - 1.0;
        gradients[i] = {s * kBaryGrad[i][0], s * kBaryGrad[i][1]};
    }
    for (int k = 0; k < 3; ++k) {
        const auto [i, j] = kLocalEdges[k];
        values[3 + k] = 4.0 * p[i] * p[j];
        gradients[3 + k] = {4.0 * (p[j] * kBaryGrad[i][0] + p[i] * kBaryGrad[j][0]),
                            4.0 * (p[j] * kBaryGrad[i][1] + p[i] * kBaryGrad[j][1])};
    }
}

const QuadratureRule& quadrature(int degree) {
    static const QuadratureRule q2 = make_rule(2);
    static const QuadratureRule q4 = make_rule(4);
    static const QuadratureRule q6 = make_rule(6);
    switch (degree) {
        case 2: return q2;
        case 4: return q4;
        case 6: return q6;
        default:
            throw std::invalid_argument("quadrature: unsupported degree " + std::to_string(degree) +
                                        " (supported: 2, 4, 6)");
    }
}

ElementGeometry ElementGeometry::of(const Mesh& mesh, std::size_t t) {
    ElementGeometry g;
    const auto& tri = mesh.triangles()[t];
    for (int k = 0; k < 3; ++k) g.vertices[k] = mesh.vertices()[tri[k]];
    const double a = g.vertices[1][0] - g.vertices[0][0];
    const double b = g.vertices[2][0] - g.vertices[0][0];
    const double c = g.vertices[1][1] - g.vertices[0][1];
    const double d = g.vertices[2][1] - g.vertices[0][1];
    const double det = a * d - b * c;
    g.area = 0.5 * det;
    g.jit = {Vec2{d / det, -c / det}, Vec2{-b / det, a / det}};
    return g;
}

Point ElementGeometry::map(const Bary& b) const {
    return {b[0] * vertices[0][0] + b[1] * vertices[1][0] + b[2] * vertices[2][0],
            b[0] * vertices[0][1] + b[1] * vertices[1][1] + b[2] * vertices[2][1]};
}

Vec2 ElementGeometry::physical_gradient(const Vec2& r) const {
    return {jit[0][0] * r[0] + jit[0][1] * r[1], jit[1][0] * r[0] + jit[1][1] * r[1]};
}

FeSpace::FeSpace(MeshPtr mesh, int degree, int components)
    : mesh_(std::move(mesh)), element_(degree), components_(components) {
    if (!mesh_) throw std::invalid_argument("FeSpace: null mesh");
    if (components != 1 && components != 2) {
        throw std::invalid_argument("FeSpace: components must be 1 or 2");
    }
    const Mesh& m = *mesh_;
    const std::size_t nv = m.num_vertices();
    node_coords_ = m.vertices();
    std::vector<bool> boundary_node = m.boundary_vertex_flags();
    if (degree == 2) {
        for (std::size_t e = 0; e < m.num_edges(); ++e) {
            node_coords_.push_back(m.edge_midpoint(e));
            boundary_node.push_back(m.boundary_edge_flags()[e]);
        }
    }

    const int per = element_.num_nodes();
    element_nodes_.reserve(m.num_triangles() * per);
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        for (int k = 0; k < 3; ++k) element_nodes_.push_back(m.triangles()[t][k]);
        if (degree == 2) {
            for (int k = 0; k < 3; ++k) element_nodes_.push_back(static_cast<int>(nv) + m.triangle_edges()[t][k]);
        }
    }

    dirichlet_.assign(num_dofs(), false);
    if (components_ == 2) {
        for (int c = 0; c < components_; ++c) {
            for (std::size_t i = 0; i < num_nodes(); ++i) dirichlet_[dof(c, static_cast<int>(i))] = boundary_node[i];
        }
    }
    free_index_.assign(num_dofs(), -1);
    for (std::size_t i = 0; i < num_dofs(); ++i) {
        if (!dirichlet_[i]) {
            free_index_[i] = static_cast<int>(free_dofs_.size());
            free_dofs_.push_back(static_cast<int>(i));
        }
    }
}

std::span<const int> FeSpace::element_nodes(std::size_t t) const {
    const std::size_t per = element_.num_nodes();
    return {element_nodes_.data() + t * per, per};
}

std::vector<double> FeSpace::restrict_to_free(std::span<const double> full) const {
    if (full.size() != num_dofs()) throw std::invalid_argument("restrict_to_free: size mismatch");
    std::vector<double> out(free_dofs_.size());
    for (std::size_t i = 0; i < free_dofs_.size(); ++i) out[i] = full[free_dofs_[i]];
    return out;
}

std::vector<double> FeSpace::extend_from_free(std::span<const double> free) const {
    if (free.size() != free_dofs_.size()) throw std::invalid_argument("extend_from_free: size mismatch");
    std::vector<double> out(num_dofs(), 0.0);
    for (std::size_t i = 0; i < free_dofs_.size(); ++i) out[free_dofs_[i]] = free[i];
    return out;
}

FeSpace build_space(MeshPtr mesh, int degree, int components) {
    return FeSpace(std::move(mesh), degree, components);
}

std::vector<double> interpolate(const FeSpace& space, const ScalarField& f) {
    if (space.components() != 1) throw std::invalid_argument("interpolate: scalar field on vector space");
    std::vector<double> out(space.num_dofs());
    const auto& nodes = space.node_coords();
    for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = f(nodes[i][0], nodes[i][1]);
    return out;
}

std::vector<double> interpolate(const FeSpace& space, const VectorField& f) {
    if (space.components() != 2) throw std::invalid_argument("interpolate: vector field on scalar space");
    std::vector<double> out(space.num_dofs());
    const auto& nodes = space.node_coords();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Vec2 v = f(nodes[i][0], nodes[i][1]);
        out[space.dof(0, static_cast<int>(i))] = v[0];
        out[space.dof(1, static_cast<int>(i))] = v[1];
    }
    return out;
}

}  // namespace pstokes
