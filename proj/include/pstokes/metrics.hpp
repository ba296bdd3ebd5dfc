#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pstokes/assembly.hpp"
#include "pstokes/mms.hpp"

namespace pstokes {

enum class Norm { L2, H1semi };

/// Error and diagnostic values recorded at one time level.
struct ErrorRecord {
    int n = 0;
    double t = 0.0;
    double vel_l2_vs_interp = 0.0;
    double vel_l2_vs_exact = 0.0;
    double vel_h1_vs_exact = 0.0;
    double pres_l2_vs_interp = 0.0;
    double pres_l2_vs_exact = 0.0;
    double pres_h1semi_vs_exact = 0.0;
    /// |v|_M^2 = integral of |v_h|^2.
    double velocity_energy = 0.0;
    /// |G^T v| (Euclidean), the discrete divergence indicator.
    double divergence = 0.0;
};

/// L2 / H1-seminorm of coefficient differences through full-DOF mass and
/// stiffness matrices.
class NormEvaluator {
public:
    explicit NormEvaluator(const FeSpace& space);
    NormEvaluator(SparseMatrix mass, SparseMatrix stiffness);

    double norm(std::span<const double> a, Norm which) const;
    double diff(std::span<const double> a, std::span<const double> b, Norm which) const;

private:
    SparseMatrix mass_;
    SparseMatrix stiffness_;
};

double fe_norm_diff(const FeSpace& space, std::span<const double> a, std::span<const double> b, Norm which);

struct ScalarExact {
    ScalarField value;
    VectorField gradient;
};

struct VectorExact {
    VectorField value;
    std::function<Grad2(double, double)> gradient;
};

/// Element-wise degree-6 quadrature of |u_h - u|^2 (or of the gradient
/// difference), square-rooted.
double error_vs_exact(const FeSpace& space, std::span<const double> coeffs, const ScalarExact& exact, Norm which);
double error_vs_exact(const FeSpace& space, std::span<const double> coeffs, const VectorExact& exact, Norm which);

/// sqrt(sum_j dt * value_j^2). Throws on empty input.
double discrete_time_norm(std::span<const double> values, double dt);
double discrete_time_norm(std::span<const ErrorRecord> records, double dt, double ErrorRecord::*component);

/// Least-squares slope of log(error) against log(h).
double observed_rate(std::span<const double> errors, std::span<const double> hs);
/// Slopes between consecutive (h, error) pairs.
std::vector<double> pairwise_rates(std::span<const double> errors, std::span<const double> hs);

/// Per-step error evaluation for the transient manufactured solution
/// v = s cos t, q = z cos t. Exact-solution norms are expanded around the
/// interpolant so each step costs a few sparse products:
///   |u_h - c u|^2 = |e|^2 + 2c (e, I u - u) + c^2 |I u - u|^2,  e = u_h - c I u.
class TransientErrorTracker {
public:
    TransientErrorTracker(const Discretization& disc, const ManufacturedCase& mms);

    /// velocity: full-length coefficients; pressure: all pressure DOFs.
    ErrorRecord evaluate(int n, double t, std::span<const double> velocity, std::span<const double> pressure) const;

    const std::vector<double>& velocity_interpolant() const { return vel_interp_; }
    const std::vector<double>& pressure_interpolant() const { return pres_interp_; }

private:
    const Discretization* disc_;
    std::vector<double> vel_interp_, pres_interp_;
    // M I u - (u, phi) and friends, and the interpolation-error norms squared.
    std::vector<double> vel_l2_cross_, vel_h1_cross_, pres_l2_cross_, pres_h1_cross_;
    double vel_l2_interp_err2_ = 0.0, vel_h1_interp_err2_ = 0.0;
    double pres_l2_interp_err2_ = 0.0, pres_h1_interp_err2_ = 0.0;
    SparseMatrix pressure_stiffness_full_;
    SparseMatrix gradient_transpose_;
};

}  // namespace pstokes
