#pragma once

#include <vector>

#include "pstokes/assembly.hpp"
#include "pstokes/mms.hpp"

namespace pstokes {

/// Stabilization parameter delta = h^2 / (nu rho^2), i.e. rho = h / sqrt(nu delta).
double choose_delta(double h, double nu, double rho);
/// Inverse of choose_delta.
double rho_of(double h, double nu, double delta);

/// Stabilized approximation (s_h, z_h) of the steady Stokes problem:
///   nu (grad s_h, grad chi) + (grad z_h, chi) = (g, chi)
///   (div s_h, psi) = -delta (grad z_h, grad psi)
struct StokesSolution {
    std::vector<double> velocity;  // all velocity DOFs, zero on the boundary
    std::vector<double> pressure;  // integral mean zero
    double nu = 0.0;
    double delta = 0.0;
    SolveReport report;
    double momentum_residual = 0.0;
    double continuity_residual = 0.0;
};

StokesSolution solve_stabilized_stokes(const Discretization& disc, double nu, double delta, const VectorField& forcing,
                                       double tol = 1e-10);
StokesSolution solve_stabilized_stokes(MeshPtr mesh, int degree, double nu, double delta, const VectorField& forcing,
                                       double tol = 1e-10);

struct SteadyErrors {
    double vel_l2_interp = 0.0;
    double pres_l2_interp = 0.0;
    double vel_l2_exact = 0.0;
    double pres_l2_exact = 0.0;
    double vel_h1_exact = 0.0;
    double pres_h1_exact = 0.0;
};

/// Errors of a steady solution against the manufactured (s, z): both
/// s_h - I_h s and s_h - s, likewise for the pressure.
SteadyErrors steady_errors(const Discretization& disc, const StokesSolution& sol, const ManufacturedCase& mms);

}  // namespace pstokes
