#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pstokes/mms.hpp"

using namespace pstokes;

namespace {

constexpr double kNu = 0.01;

using oracle::d1;
using oracle::d2;
using oracle::fd_forcing;

}  // namespace

TEST_SUITE("mms") {

TEST_CASE("corrected velocity is divergence free and vanishes on the boundary") {
    const ManufacturedCase m(kNu);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double x = u(rng), y = u(rng);
        const auto g = m.grad_s(x, y);
        worst = std::max(worst, std::abs(g[0][0] + g[1][1]));
        worst = std::max(worst, std::abs(m.div_s(x, y)));
    }
    CHECK(worst <= 1e-12);
    for (double s : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        for (const auto& p : {Vec2{0.0, s}, Vec2{1.0, s}, Vec2{s, 0.0}, Vec2{s, 1.0}}) {
            const auto v = m.s(p[0], p[1]);
            CHECK(std::abs(v[0]) < 1e-15);
            CHECK(std::abs(v[1]) < 1e-15);
        }
    }
}

TEST_CASE("analytic derivatives match finite differences") {
    const ManufacturedCase m(kNu);
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const double h = 1e-3;
    for (int k = 0; k < 50; ++k) {
        const double x = u(rng), y = u(rng);
        const auto g = m.grad_s(x, y);
        const auto lap = m.laplacian_s(x, y);
        const auto gz = m.grad_z(x, y);
        for (int c = 0; c < 2; ++c) {
            CHECK(std::abs(d1([&](double s) { return m.s(s, y)[c]; }, x, h) - g[c][0]) < 1e-9);
            CHECK(std::abs(d1([&](double s) { return m.s(x, s)[c]; }, y, h) - g[c][1]) < 1e-9);
            const double fd_lap = d2([&](double s) { return m.s(s, y)[c]; }, x, h) +
                                  d2([&](double s) { return m.s(x, s)[c]; }, y, h);
            CHECK(std::abs(fd_lap - lap[c]) < 1e-6);
        }
        CHECK(std::abs(d1([&](double s) { return m.z(s, y); }, x, h) - gz[0]) < 1e-10);
        CHECK(std::abs(d1([&](double s) { return m.z(x, s); }, y, h) - gz[1]) < 1e-10);
        const auto f = m.steady_forcing(x, y);
        CHECK(std::abs(f[0] - (-kNu * lap[0] + gz[0])) < 1e-15);
        CHECK(std::abs(f[1] - (-kNu * lap[1] + gz[1])) < 1e-15);
    }
}

TEST_CASE("transient forcing matches a finite-difference oracle") {
    const ManufacturedCase m(kNu);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0), ut(0.0, 6.0);
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng), y = u(rng), t = ut(rng);
        const auto g = m.transient_forcing(x, y, t);
        const auto fd = fd_forcing(m, x, y, t);
        const double scale = std::hypot(g[0], g[1]);
        CHECK(std::hypot(g[0] - fd[0], g[1] - fd[1]) <= 1e-6 * scale + 1e-12);
        const auto sep = m.separable_forcing()(x, y, t);
        CHECK(std::abs(sep[0] - g[0]) <= 1e-14 * (1 + scale));
        CHECK(std::abs(sep[1] - g[1]) <= 1e-14 * (1 + scale));
    }
}

TEST_CASE("time derivative and time factor") {
    const ManufacturedCase m(kNu);
    for (double t : {0.0, 0.4, 2.0}) {
        CHECK(ManufacturedCase::time_factor(t) == std::cos(t));
        const auto vt = m.vt(0.3, 0.6, t);
        const double fd = d1([&](double s) { return m.v(0.3, 0.6, s)[0]; }, t, 1e-3);
        CHECK(std::abs(vt[0] - fd) < 1e-11);
        CHECK(m.q(0.3, 0.6, t) == doctest::Approx(m.z(0.3, 0.6) * std::cos(t)));
    }
}

TEST_CASE("pressure has zero mean") {
    const ManufacturedCase m(kNu);
    const auto [x, w] = oracle::gauss_legendre(20);
    double mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) mean += w[i] * w[j] * m.z(x[i], x[j]);
    }
    CHECK(std::abs(mean) <= 1e-10);
}

TEST_CASE("printed variant is not admissible") {
    const ManufacturedCase p(kNu, ManufacturedCase::Variant::printed);
    CHECK(std::abs(p.div_s(0.3, 0.3)) > 1e-2);
    CHECK(std::abs(p.s(1.0, 0.5)[1]) > 1.0);
}

TEST_CASE("zero variant") {
    const ManufacturedCase z(kNu, ManufacturedCase::Variant::zero);
    const auto f = z.transient_forcing(0.2, 0.7, 1.3);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == 0.0);
    CHECK(z.q(0.2, 0.7, 1.3) == 0.0);
    CHECK(z.v(0.2, 0.7, 0.0)[0] == 0.0);
}

TEST_CASE("construction and names") {
    CHECK_THROWS_AS(ManufacturedCase(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ManufacturedCase(-1.0), std::invalid_argument);
    for (auto v : {ManufacturedCase::Variant::corrected, ManufacturedCase::Variant::printed,
                   ManufacturedCase::Variant::zero}) {
        CHECK(parse_case_variant(to_string(v)) == v);
    }
    CHECK_THROWS_AS(parse_case_variant("bogus"), std::invalid_argument);
    CHECK(berrone_case(0.5).nu() == 0.5);
}

}
