#pragma once

#include <vector>

#include "pstokes/fe.hpp"
#include "pstokes/sparse.hpp"

namespace pstokes {

/// Which velocity DOFs a matrix row (or column) set covers.
enum class Dofs { free, all };

/// (phi_j, phi_i), block diagonal over components.
SparseMatrix assemble_mass(const FeSpace& space, Dofs dofs = Dofs::all);
/// (grad phi_j, grad phi_i), block diagonal over components.
SparseMatrix assemble_stiffness(const FeSpace& space, Dofs dofs = Dofs::all);
/// G_{i mu} = (grad psi_mu, phi_i); rows are velocity DOFs, columns all pressure DOFs.
SparseMatrix assemble_pressure_gradient(const FeSpace& velocity, const FeSpace& pressure, Dofs rows = Dofs::free);
/// D_{mu i} = (div phi_i, psi_mu). Assembled on its own; G = -D^T holds on free DOFs.
SparseMatrix assemble_divergence(const FeSpace& velocity, const FeSpace& pressure, Dofs cols = Dofs::free);
/// (grad psi_nu, grad psi_mu) on a scalar space.
SparseMatrix assemble_pressure_stiffness(const FeSpace& pressure);
/// Componentwise (f, phi_i) with the degree-6 rule.
std::vector<double> assemble_load(const FeSpace& velocity, const VectorField& f, Dofs dofs = Dofs::free);
/// (f, psi_i) on a scalar space with the degree-6 rule.
std::vector<double> assemble_load(const FeSpace& space, const ScalarField& f);

/// Restrict a full-DOF matrix to the free rows and columns of a space.
SparseMatrix restrict_to_free(const SparseMatrix& full, const FeSpace& space);

/// Operators of the discrete Stokes problems on free velocity DOFs.
struct SystemMatrices {
    SparseMatrix mass;               // M
    SparseMatrix stiffness;          // A
    SparseMatrix gradient;           // G
    SparseMatrix pressure_stiffness; // S
};

/// Equal-order velocity/pressure discretization on one mesh, with the
/// full-DOF matrices that the error norms need.
struct Discretization {
    MeshPtr mesh;
    FeSpace velocity;
    FeSpace pressure;
    SystemMatrices ops;
    SparseMatrix velocity_mass_full;
    SparseMatrix velocity_stiffness_full;
    SparseMatrix pressure_mass_full;
    /// (psi_mu, 1): defines the integral mean of a pressure vector.
    std::vector<double> pressure_weights;

    static Discretization build(MeshPtr mesh, int degree);
};

}  // namespace pstokes
