#include "pstokes/assembly.hpp"

#include <stdexcept>

namespace pstokes {

namespace {

/// Basis values and reference gradients at every point of a rule.
struct BasisTable {
    int num_points = 0;
    int num_basis = 0;
    std::vector<double> values;  // [q * num_basis + b]
    std::vector<Vec2> gradients;

    BasisTable(const ReferenceElement& elem, const QuadratureRule& rule)
        : num_points(static_cast<int>(rule.points.size())), num_basis(elem.num_nodes()) {
        values.resize(num_points * num_basis);
        gradients.resize(num_points * num_basis);
        for (int q = 0; q < num_points; ++q) {
            elem.eval(rule.points[q], std::span(values).subspan(q * num_basis, num_basis),
                      std::span(gradients).subspan(q * num_basis, num_basis));
        }
    }
    double value(int q, int b) const { return values[q * num_basis + b]; }
    const Vec2& gradient(int q, int b) const { return gradients[q * num_basis + b]; }
};

std::vector<int> dof_map(const FeSpace& space, Dofs dofs) {
    if (dofs == Dofs::free) return space.free_index();
    std::vector<int> all(space.num_dofs());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return all;
}

std::size_t dof_count(const FeSpace& space, Dofs dofs) {
    return dofs == Dofs::free ? space.num_free() : space.num_dofs();
}

enum class Form { mass, stiffness };

SparseMatrix assemble_scalar_form(const FeSpace& space, Dofs dofs, Form form) {
    const Mesh& mesh = space.mesh();
    const auto& rule = quadrature(assembly_quadrature_degree(space.degree()));
    const BasisTable tab(space.element(), rule);
    const int nb = tab.num_basis;
    const auto map = dof_map(space, dofs);
    const std::size_t n = dof_count(space, dofs);

    TripletBuilder tb(n, n);
    tb.reserve(mesh.num_triangles() * nb * nb * space.components());
    std::vector<double> local(nb * nb);
    std::vector<Vec2> grads(nb);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = ElementGeometry::of(mesh, t);
        const double scale = 2.0 * geo.area;
        std::fill(local.begin(), local.end(), 0.0);
        for (int q = 0; q < tab.num_points; ++q) {
            const double w = rule.weights[q] * scale;
            if (form == Form::mass) {
                for (int i = 0; i < nb; ++i) {
                    for (int j = 0; j < nb; ++j) local[i * nb + j] += w * tab.value(q, i) * tab.value(q, j);
                }
            } else {
                for (int b = 0; b < nb; ++b) grads[b] = geo.physical_gradient(tab.gradient(q, b));
                for (int i = 0; i < nb; ++i) {
                    for (int j = 0; j < nb; ++j) {
                        local[i * nb + j] += w * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                    }
                }
            }
        }
        const auto nodes = space.element_nodes(t);
        for (int c = 0; c < space.components(); ++c) {
            for (int i = 0; i < nb; ++i) {
                const int gi = map[space.dof(c, nodes[i])];
                if (gi < 0) continue;
                for (int j = 0; j < nb; ++j) {
                    const int gj = map[space.dof(c, nodes[j])];
                    if (gj < 0) continue;
                    tb.add(gi, gj, local[i * nb + j]);
                }
            }
        }
    }
    return tb.build();
}

void check_same_mesh(const FeSpace& velocity, const FeSpace& pressure) {
    if (velocity.mesh_ptr() != pressure.mesh_ptr()) {
        throw std::invalid_argument("velocity and pressure spaces must share the same mesh");
    }
    if (velocity.components() != 2 || pressure.components() != 1) {
        throw std::invalid_argument("expected a 2-component velocity space and a scalar pressure space");
    }
}

/// Local coupling C[a][c][b] = integral of (d_c psi_b) phi_a over the element.
/// With divergence set the derivative moves to the velocity basis: (d_c phi_a) psi_b.
SparseMatrix assemble_coupling(const FeSpace& velocity, const FeSpace& pressure, Dofs vdofs, bool divergence) {
    check_same_mesh(velocity, pressure);
    const Mesh& mesh = velocity.mesh();
    const int deg = std::max(velocity.degree(), pressure.degree());
    const auto& rule = quadrature(assembly_quadrature_degree(deg));
    const BasisTable vt(velocity.element(), rule);
    const BasisTable pt(pressure.element(), rule);
    const int nvb = vt.num_basis;
    const int npb = pt.num_basis;
    const auto vmap = dof_map(velocity, vdofs);
    const std::size_t nv = dof_count(velocity, vdofs);
    const std::size_t np = pressure.num_dofs();

    TripletBuilder tb(divergence ? np : nv, divergence ? nv : np);
    tb.reserve(mesh.num_triangles() * 2 * nvb * npb);
    std::vector<double> local(nvb * 2 * npb);
    std::vector<Vec2> grads(std::max(nvb, npb));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = ElementGeometry::of(mesh, t);
        const double scale = 2.0 * geo.area;
        std::fill(local.begin(), local.end(), 0.0);
        for (int q = 0; q < vt.num_points; ++q) {
            const double w = rule.weights[q] * scale;
            if (!divergence) {
                for (int b = 0; b < npb; ++b) grads[b] = geo.physical_gradient(pt.gradient(q, b));
                for (int a = 0; a < nvb; ++a) {
                    for (int c = 0; c < 2; ++c) {
                        for (int b = 0; b < npb; ++b) local[(a * 2 + c) * npb + b] += w * grads[b][c] * vt.value(q, a);
                    }
                }
            } else {
                for (int a = 0; a < nvb; ++a) grads[a] = geo.physical_gradient(vt.gradient(q, a));
                for (int a = 0; a < nvb; ++a) {
                    for (int c = 0; c < 2; ++c) {
                        for (int b = 0; b < npb; ++b) local[(a * 2 + c) * npb + b] += w * grads[a][c] * pt.value(q, b);
                    }
                }
            }
        }
        const auto vnodes = velocity.element_nodes(t);
        const auto pnodes = pressure.element_nodes(t);
        for (int a = 0; a < nvb; ++a) {
            for (int c = 0; c < 2; ++c) {
                const int gi = vmap[velocity.dof(c, vnodes[a])];
                if (gi < 0) continue;
                for (int b = 0; b < npb; ++b) {
                    const double v = local[(a * 2 + c) * npb + b];
                    if (divergence) {
                        tb.add(pnodes[b], gi, v);
                    } else {
                        tb.add(gi, pnodes[b], v);
                    }
                }
            }
        }
    }
    return tb.build();
}

}  // namespace

SparseMatrix assemble_mass(const FeSpace& space, Dofs dofs) { return assemble_scalar_form(space, dofs, Form::mass); }

SparseMatrix assemble_stiffness(const FeSpace& space, Dofs dofs) {
    return assemble_scalar_form(space, dofs, Form::stiffness);
}

SparseMatrix assemble_pressure_gradient(const FeSpace& velocity, const FeSpace& pressure, Dofs rows) {
    return assemble_coupling(velocity, pressure, rows, false);
}

SparseMatrix assemble_divergence(const FeSpace& velocity, const FeSpace& pressure, Dofs cols) {
    return assemble_coupling(velocity, pressure, cols, true);
}

SparseMatrix assemble_pressure_stiffness(const FeSpace& pressure) {
    if (pressure.components() != 1) throw std::invalid_argument("assemble_pressure_stiffness: scalar space expected");
    return assemble_scalar_form(pressure, Dofs::all, Form::stiffness);
}

std::vector<double> assemble_load(const FeSpace& velocity, const VectorField& f, Dofs dofs) {
    if (velocity.components() != 2) throw std::invalid_argument("assemble_load: vector field on scalar space");
    const Mesh& mesh = velocity.mesh();
    const auto& rule = quadrature(kHighOrderQuadrature);
    const BasisTable tab(velocity.element(), rule);
    const auto map = dof_map(velocity, dofs);
    std::vector<double> out(dof_count(velocity, dofs), 0.0);
    std::vector<double> local(2 * tab.num_basis);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = ElementGeometry::of(mesh, t);
        const double scale = 2.0 * geo.area;
        std::fill(local.begin(), local.end(), 0.0);
        for (int q = 0; q < tab.num_points; ++q) {
            const Point x = geo.map(rule.points[q]);
            const Vec2 fv = f(x[0], x[1]);
            const double w = rule.weights[q] * scale;
            for (int a = 0; a < tab.num_basis; ++a) {
                local[2 * a] += w * fv[0] * tab.value(q, a);
                local[2 * a + 1] += w * fv[1] * tab.value(q, a);
            }
        }
        const auto nodes = velocity.element_nodes(t);
        for (int a = 0; a < tab.num_basis; ++a) {
            for (int c = 0; c < 2; ++c) {
                const int gi = map[velocity.dof(c, nodes[a])];
                if (gi >= 0) out[gi] += local[2 * a + c];
            }
        }
    }
    return out;
}

std::vector<double> assemble_load(const FeSpace& space, const ScalarField& f) {
    if (space.components() != 1) throw std::invalid_argument("assemble_load: scalar field on vector space");
    const Mesh& mesh = space.mesh();
    const auto& rule = quadrature(kHighOrderQuadrature);
    const BasisTable tab(space.element(), rule);
    std::vector<double> out(space.num_dofs(), 0.0);
    std::vector<double> local(tab.num_basis);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = ElementGeometry::of(mesh, t);
        const double scale = 2.0 * geo.area;
        std::fill(local.begin(), local.end(), 0.0);
        for (int q = 0; q < tab.num_points; ++q) {
            const Point x = geo.map(rule.points[q]);
            const double w = rule.weights[q] * scale * f(x[0], x[1]);
            for (int a = 0; a < tab.num_basis; ++a) local[a] += w * tab.value(q, a);
        }
        const auto nodes = space.element_nodes(t);
        for (int a = 0; a < tab.num_basis; ++a) out[nodes[a]] += local[a];
    }
    return out;
}

SparseMatrix restrict_to_free(const SparseMatrix& full, const FeSpace& space) {
    return full.select(space.free_dofs(), space.free_dofs());
}

Discretization Discretization::build(MeshPtr mesh, int degree) {
    FeSpace velocity = build_space(mesh, degree, 2);
    FeSpace pressure = build_space(mesh, degree, 1);
    SparseMatrix vmass = assemble_mass(velocity, Dofs::all);
    SparseMatrix vstiff = assemble_stiffness(velocity, Dofs::all);
    SparseMatrix pmass = assemble_mass(pressure, Dofs::all);
    SystemMatrices ops{restrict_to_free(vmass, velocity), restrict_to_free(vstiff, velocity),
                       assemble_pressure_gradient(velocity, pressure, Dofs::free),
                       assemble_pressure_stiffness(pressure)};
    const std::vector<double> ones(pressure.num_dofs(), 1.0);
    std::vector<double> weights = spmv(pmass, ones);
    return Discretization{std::move(mesh),       std::move(velocity), std::move(pressure), std::move(ops),
                          std::move(vmass),      std::move(vstiff),   std::move(pmass),    std::move(weights)};
}

}  // namespace pstokes
