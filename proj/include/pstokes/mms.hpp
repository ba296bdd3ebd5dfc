#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pstokes/fe.hpp"

namespace pstokes {

using Grad2 = std::array<Vec2, 2>;  // row c holds grad of component c

/// Forcing of the form g(x, y, t) = sum_k a_k(t) f_k(x, y). Lets the time
/// loop assemble each spatial load once.
struct SeparableForcing {
    struct Term {
        std::function<double(double)> amplitude;
        VectorField field;
    };
    std::vector<Term> terms;

    Vec2 operator()(double x, double y, double t) const;
};

/// Manufactured Stokes solution on the unit square:
///   s1 = x^2 (1-x)^2 sin(2 pi y)
///   s2 = -(2/pi) x (1 - 3x + 2x^2) sin^2(pi y)      (divergence-free companion)
///   z  = sin(x) cos(y) + (cos 1 - 1) sin 1          (zero mean)
/// and the transient fields v = s cos t, q = z cos t.
///
/// Variant::printed uses s2 = -2x(1+3x+2x^2) sin^2(pi y) instead, which is
/// neither divergence-free nor zero on x = 1; it exists for comparison only.
/// Variant::zero is the trivial solution (all fields and forcings vanish).
class ManufacturedCase {
public:
    enum class Variant { corrected, printed, zero };

    explicit ManufacturedCase(double nu, Variant variant = Variant::corrected);

    double nu() const { return nu_; }
    Variant variant() const { return variant_; }

    // Steady fields.
    Vec2 s(double x, double y) const;
    Grad2 grad_s(double x, double y) const;
    Vec2 laplacian_s(double x, double y) const;
    double div_s(double x, double y) const;
    double z(double x, double y) const;
    Vec2 grad_z(double x, double y) const;
    /// -nu lap s + grad z.
    Vec2 steady_forcing(double x, double y) const;

    // Transient fields.
    static double time_factor(double t);
    Vec2 v(double x, double y, double t) const;
    Vec2 vt(double x, double y, double t) const;
    double q(double x, double y, double t) const;
    /// v_t - nu lap v + grad q.
    Vec2 transient_forcing(double x, double y, double t) const;
    SeparableForcing separable_forcing() const;

    VectorField s_field() const;
    ScalarField z_field() const;

private:
    double nu_;
    Variant variant_;
};

/// berrone_case(nu): the corrected manufactured solution.
inline ManufacturedCase berrone_case(double nu) { return ManufacturedCase(nu); }

std::string to_string(ManufacturedCase::Variant v);
ManufacturedCase::Variant parse_case_variant(const std::string& s);

}  // namespace pstokes
