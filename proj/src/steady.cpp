#include "pstokes/steady.hpp"

#include <cmath>
#include <stdexcept>

#include "pstokes/metrics.hpp"

namespace pstokes {

double choose_delta(double h, double nu, double rho) {
    if (!(h > 0.0) || !(nu > 0.0) || !(rho > 0.0)) {
        throw std::invalid_argument("choose_delta: h, nu and rho must be positive");
    }
    return h * h / (nu * rho * rho);
}

double rho_of(double h, double nu, double delta) {
    if (!(h > 0.0) || !(nu > 0.0) || !(delta > 0.0)) {
        throw std::invalid_argument("rho_of: h, nu and delta must be positive");
    }
    return h / std::sqrt(nu * delta);
}

StokesSolution solve_stabilized_stokes(const Discretization& disc, double nu, double delta, const VectorField& forcing,
                                       double tol) {
    if (!(nu > 0.0)) throw std::invalid_argument("solve_stabilized_stokes: nu must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("solve_stabilized_stokes: delta must be > 0");
    const auto rhs = assemble_load(disc.velocity, forcing, Dofs::free);
    const SparseMatrix k = scaled(nu, disc.ops.stiffness);
    auto res = saddle_solve(k, disc.ops.gradient, disc.ops.pressure_stiffness, delta, rhs, tol, disc.pressure_weights);

    StokesSolution sol;
    sol.velocity = disc.velocity.extend_from_free(res.velocity);
    sol.pressure = std::move(res.pressure);
    sol.nu = nu;
    sol.delta = delta;
    sol.report = res.report;
    sol.momentum_residual = res.momentum_residual;
    sol.continuity_residual = res.continuity_residual;
    return sol;
}

StokesSolution solve_stabilized_stokes(MeshPtr mesh, int degree, double nu, double delta, const VectorField& forcing,
                                       double tol) {
    const auto disc = Discretization::build(std::move(mesh), degree);
    return solve_stabilized_stokes(disc, nu, delta, forcing, tol);
}

SteadyErrors steady_errors(const Discretization& disc, const StokesSolution& sol, const ManufacturedCase& mms) {
    const VectorExact vex{mms.s_field(), [mms](double x, double y) { return mms.grad_s(x, y); }};
    const ScalarExact pex{mms.z_field(), [mms](double x, double y) { return mms.grad_z(x, y); }};
    const NormEvaluator vnorm(disc.velocity_mass_full, disc.velocity_stiffness_full);
    const NormEvaluator pnorm(disc.pressure_mass_full, disc.ops.pressure_stiffness);

    SteadyErrors e;
    e.vel_l2_interp = vnorm.diff(sol.velocity, interpolate(disc.velocity, vex.value), Norm::L2);
    e.pres_l2_interp = pnorm.diff(sol.pressure, interpolate(disc.pressure, pex.value), Norm::L2);
    e.vel_l2_exact = error_vs_exact(disc.velocity, sol.velocity, vex, Norm::L2);
    e.pres_l2_exact = error_vs_exact(disc.pressure, sol.pressure, pex, Norm::L2);
    e.vel_h1_exact = error_vs_exact(disc.velocity, sol.velocity, vex, Norm::H1semi);
    e.pres_h1_exact = error_vs_exact(disc.pressure, sol.pressure, pex, Norm::H1semi);
    return e;
}

}  // namespace pstokes
