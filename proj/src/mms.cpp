#include "pstokes/mms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pstokes {

namespace {

constexpr double kPi = std::numbers::pi;

// X(x) = x^2 (1-x)^2 and its derivatives.
double X0(double x) { return x * x * (1 - x) * (1 - x); }
double X1(double x) { return 2 * x * (1 - x) * (1 - 2 * x); }
double X2(double x) { return 2 - 12 * x + 12 * x * x; }
double X3(double x) { return -12 + 24 * x; }

// Printed second component: -P(x) sin^2(pi y), P = 2x + 6x^2 + 4x^3.
double P0(double x) { return 2 * x * (1 + 3 * x + 2 * x * x); }
double P1(double x) { return 2 + 12 * x + 12 * x * x; }
double P2(double x) { return 12 + 24 * x; }

const double kPressureShift = (std::cos(1.0) - 1.0) * std::sin(1.0);

}  // namespace

Vec2 SeparableForcing::operator()(double x, double y, double t) const {
    Vec2 out{0.0, 0.0};
    for (const auto& term : terms) {
        const double a = term.amplitude(t);
        const Vec2 f = term.field(x, y);
        out[0] += a * f[0];
        out[1] += a * f[1];
    }
    return out;
}

ManufacturedCase::ManufacturedCase(double nu, Variant variant) : nu_(nu), variant_(variant) {
    if (!(nu > 0.0)) throw std::invalid_argument("ManufacturedCase: nu must be > 0");
}

Vec2 ManufacturedCase::s(double x, double y) const {
    switch (variant_) {
        case Variant::zero: return {0.0, 0.0};
        case Variant::corrected: {
            const double sy = std::sin(kPi * y);
            return {X0(x) * std::sin(2 * kPi * y), -X1(x) * sy * sy / kPi};
        }
        case Variant::printed: {
            const double sy = std::sin(kPi * y);
            return {X0(x) * std::sin(2 * kPi * y), -P0(x) * sy * sy};
        }
    }
    return {};
}

Grad2 ManufacturedCase::grad_s(double x, double y) const {
    if (variant_ == Variant::zero) return {};
    const double s2y = std::sin(2 * kPi * y);
    const double c2y = std::cos(2 * kPi * y);
    const double sy2 = std::sin(kPi * y) * std::sin(kPi * y);
    const Vec2 g1{X1(x) * s2y, 2 * kPi * X0(x) * c2y};
    if (variant_ == Variant::corrected) {
        // d/dy [sin^2(pi y) / pi] = sin(2 pi y)
        return {g1, Vec2{-X2(x) * sy2 / kPi, -X1(x) * s2y}};
    }
    return {g1, Vec2{-P1(x) * sy2, -P0(x) * kPi * s2y}};
}

Vec2 ManufacturedCase::laplacian_s(double x, double y) const {
    if (variant_ == Variant::zero) return {0.0, 0.0};
    const double s2y = std::sin(2 * kPi * y);
    const double c2y = std::cos(2 * kPi * y);
    const double sy2 = std::sin(kPi * y) * std::sin(kPi * y);
    const double lap1 = X2(x) * s2y - 4 * kPi * kPi * X0(x) * s2y;
    if (variant_ == Variant::corrected) {
        return {lap1, -X3(x) * sy2 / kPi - X1(x) * 2 * kPi * c2y};
    }
    return {lap1, -P2(x) * sy2 - P0(x) * 2 * kPi * kPi * c2y};
}

double ManufacturedCase::div_s(double x, double y) const {
    const Grad2 g = grad_s(x, y);
    return g[0][0] + g[1][1];
}

double ManufacturedCase::z(double x, double y) const {
    if (variant_ == Variant::zero) return 0.0;
    return std::sin(x) * std::cos(y) + kPressureShift;
}

Vec2 ManufacturedCase::grad_z(double x, double y) const {
    if (variant_ == Variant::zero) return {0.0, 0.0};
    return {std::cos(x) * std::cos(y), -std::sin(x) * std::sin(y)};
}

Vec2 ManufacturedCase::steady_forcing(double x, double y) const {
    const Vec2 lap = laplacian_s(x, y);
    const Vec2 gz = grad_z(x, y);
    return {-nu_ * lap[0] + gz[0], -nu_ * lap[1] + gz[1]};
}

double ManufacturedCase::time_factor(double t) { return std::cos(t); }

Vec2 ManufacturedCase::v(double x, double y, double t) const {
    const Vec2 sv = s(x, y);
    const double c = time_factor(t);
    return {c * sv[0], c * sv[1]};
}

Vec2 ManufacturedCase::vt(double x, double y, double t) const {
    const Vec2 sv = s(x, y);
    const double d = -std::sin(t);
    return {d * sv[0], d * sv[1]};
}

double ManufacturedCase::q(double x, double y, double t) const { return z(x, y) * time_factor(t); }

Vec2 ManufacturedCase::transient_forcing(double x, double y, double t) const {
    const Vec2 a = vt(x, y, t);
    const Vec2 b = steady_forcing(x, y);
    const double c = time_factor(t);
    return {a[0] + c * b[0], a[1] + c * b[1]};
}

SeparableForcing ManufacturedCase::separable_forcing() const {
    SeparableForcing f;
    if (variant_ == Variant::zero) return f;
    const ManufacturedCase self = *this;
    f.terms.push_back({[](double t) { return -std::sin(t); }, [self](double x, double y) { return self.s(x, y); }});
    f.terms.push_back({[](double t) { return std::cos(t); },
                       [self](double x, double y) { return self.steady_forcing(x, y); }});
    return f;
}

VectorField ManufacturedCase::s_field() const {
    const ManufacturedCase self = *this;
    return [self](double x, double y) { return self.s(x, y); };
}

ScalarField ManufacturedCase::z_field() const {
    const ManufacturedCase self = *this;
    return [self](double x, double y) { return self.z(x, y); };
}

std::string to_string(ManufacturedCase::Variant v) {
    switch (v) {
        case ManufacturedCase::Variant::corrected: return "corrected";
        case ManufacturedCase::Variant::printed: return "printed";
        case ManufacturedCase::Variant::zero: return "zero";
    }
    return "?";
}

ManufacturedCase::Variant parse_case_variant(const std::string& s) {
    if (s == "corrected") return ManufacturedCase::Variant::corrected;
    if (s == "printed") return ManufacturedCase::Variant::printed;
    if (s == "zero") return ManufacturedCase::Variant::zero;
    throw std::invalid_argument("unknown manufactured case '" + s + "' (expected corrected, printed or zero)");
}

}  // namespace pstokes
