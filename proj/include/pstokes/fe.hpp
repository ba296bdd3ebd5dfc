#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "pstokes/mesh.hpp"

namespace pstokes {

using Vec2 = std::array<double, 2>;
using Bary = std::array<double, 3>;

/// Lagrange element of degree 1 or 2 on the reference triangle
/// (0,0), (1,0), (0,1) with barycentrics (1-x-y, x, y).
///
/// Node order: the three vertices, then for P2 the midpoints of local
/// edges (0,1), (1,2), (2,0), matching Mesh::triangle_edges().
class ReferenceElement {
public:
    explicit ReferenceElement(int degree);

    int degree() const { return degree_; }
    int num_nodes() const { return degree_ == 1 ? 3 : 6; }
    const std::vector<Bary>& nodes() const { return nodes_; }

    /// Shape values and reference-coordinate gradients at a barycentric point.
    /// Throws if the coordinates do not sum to 1 within 1e-12.
    void eval(const Bary& point, std::span<double> values, std::span<Vec2> gradients) const;

private:
    int degree_;
    std::vector<Bary> nodes_;
};

struct QuadratureRule {
    int degree = 0;
    std::vector<Bary> points;
    /// Reference-area weights; they sum to 1/2.
    std::vector<double> weights;
};

/// Symmetric triangle rule exact to the given degree (2, 4 or 6).
const QuadratureRule& quadrature(int degree);

/// Quadrature degree used to assemble bilinear forms of a degree-k space.
inline int assembly_quadrature_degree(int fe_degree) { return fe_degree == 1 ? 2 : 4; }
/// Quadrature degree for error integrals and loads of non-polynomial data.
inline constexpr int kHighOrderQuadrature = 6;

/// Affine map data of one triangle.
struct ElementGeometry {
    std::array<Point, 3> vertices;
    double area = 0.0;
    /// Inverse-transpose Jacobian rows: grad_phys = jit * grad_ref.
    std::array<Vec2, 2> jit{};

    static ElementGeometry of(const Mesh& mesh, std::size_t t);
    Point map(const Bary& b) const;
    Vec2 physical_gradient(const Vec2& ref) const;
};

/// Global Lagrange space of degree k with 1 (pressure) or 2 (velocity)
/// components. DOFs are component-major: dof = c * num_nodes() + node.
class FeSpace {
public:
    FeSpace(MeshPtr mesh, int degree, int components);

    const Mesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    int degree() const { return element_.degree(); }
    int components() const { return components_; }
    const ReferenceElement& element() const { return element_; }

    std::size_t num_nodes() const { return node_coords_.size(); }
    std::size_t num_dofs() const { return num_nodes() * components_; }
    const std::vector<Point>& node_coords() const { return node_coords_; }
    /// Local-to-global node map of triangle t.
    std::span<const int> element_nodes(std::size_t t) const;

    int dof(int component, int node) const { return component * static_cast<int>(num_nodes()) + node; }

    bool is_dirichlet(int dof) const { return dirichlet_[dof]; }
    const std::vector<bool>& dirichlet_flags() const { return dirichlet_; }
    std::size_t num_free() const { return free_dofs_.size(); }
    /// Free DOFs in ascending order.
    const std::vector<int>& free_dofs() const { return free_dofs_; }
    /// Position in free_dofs(), or -1 for Dirichlet DOFs.
    const std::vector<int>& free_index() const { return free_index_; }

    std::vector<double> restrict_to_free(std::span<const double> full) const;
    /// Expand free coefficients to full length with zeros on Dirichlet DOFs.
    std::vector<double> extend_from_free(std::span<const double> free) const;

private:
    MeshPtr mesh_;
    ReferenceElement element_;
    int components_;
    std::vector<Point> node_coords_;
    std::vector<int> element_nodes_;
    std::vector<bool> dirichlet_;
    std::vector<int> free_dofs_;
    std::vector<int> free_index_;
};

/// Velocity spaces (2 components) get every boundary node as Dirichlet;
/// scalar spaces get none.
FeSpace build_space(MeshPtr mesh, int degree, int components);

using ScalarField = std::function<double(double x, double y)>;
using VectorField = std::function<Vec2(double x, double y)>;

/// Nodal interpolant I_h.
std::vector<double> interpolate(const FeSpace& space, const ScalarField& f);
std::vector<double> interpolate(const FeSpace& space, const VectorField& f);

}  // namespace pstokes
