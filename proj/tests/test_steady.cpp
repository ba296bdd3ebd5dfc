#include <cmath>

#include "doctest.h"
#include "pstokes/metrics.hpp"
#include "pstokes/steady.hpp"

using namespace pstokes;

namespace {

constexpr double kNu = 0.01;

SteadyErrors solve_case(int n, int degree, double rho) {
    const auto d = Discretization::build(build_grid(n), degree);
    const ManufacturedCase mms(kNu);
    const auto sol = solve_stabilized_stokes(d, kNu, choose_delta(1.0 / n, kNu, rho),
                                             [&](double x, double y) { return mms.steady_forcing(x, y); });
    return steady_errors(d, sol, mms);
}

}  // namespace

TEST_SUITE("steady") {

TEST_CASE("delta law") {
    CHECK(choose_delta(0.1, 0.01, 10.0) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(choose_delta(0.05, 0.01, 100.0) == doctest::Approx(0.01 * 0.05 * 0.05).epsilon(1e-14));
    CHECK(choose_delta(1.0, 1.0, 1.0) == 1.0);
    for (double rho : {1.0, 10.0, 100.0, 1000.0}) {
        const double h = 1.0 / 40;
        CHECK(std::abs(rho_of(h, kNu, choose_delta(h, kNu, rho)) - rho) <= 1e-12 * rho);
    }
    CHECK_THROWS_AS(choose_delta(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_delta(0.1, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rho_of(0.1, 0.01, 0.0), std::invalid_argument);
}

TEST_CASE("zero forcing gives the zero solution") {
    const auto d = Discretization::build(build_grid(6), 2);
    const auto sol = solve_stabilized_stokes(d, kNu, 1e-3, [](double, double) { return Vec2{0.0, 0.0}; });
    for (double v : sol.velocity) CHECK(v == 0.0);
    for (double p : sol.pressure) CHECK(p == 0.0);
}

TEST_CASE("block residuals and zero mean") {
    const ManufacturedCase mms(kNu);
    for (int deg : {1, 2}) {
        const int n = 12;
        const auto d = Discretization::build(build_grid(n), deg);
        const double delta = choose_delta(1.0 / n, kNu, 100.0);
        const VectorField g = [&](double x, double y) { return mms.steady_forcing(x, y); };
        const auto sol = solve_stabilized_stokes(d, kNu, delta, g);
        const auto rhs = assemble_load(d.velocity, g);
        const auto s = d.velocity.restrict_to_free(sol.velocity);
        auto m = spmv(d.ops.stiffness, s);
        const auto gz = spmv(d.ops.gradient, sol.pressure);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = kNu * m[i] + gz[i] - rhs[i];
        auto c = spmv(d.ops.gradient.transpose(), s);
        const auto sz = spmv(d.ops.pressure_stiffness, sol.pressure);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] -= delta * sz[i];
        CHECK(norm2(m) <= 1e-9 * norm2(rhs));
        CHECK(norm2(c) <= 1e-9 * norm2(rhs));
        CHECK(std::abs(dot(sol.pressure, d.pressure_weights)) < 1e-13);
        for (std::size_t i = 0; i < sol.velocity.size(); ++i) {
            if (d.velocity.is_dirichlet(static_cast<int>(i))) CHECK(sol.velocity[i] == 0.0);
        }
    }
    CHECK_THROWS_AS(solve_stabilized_stokes(build_grid(2), 1, kNu, 0.0, [](double, double) { return Vec2{}; }),
                    std::invalid_argument);
}

TEST_CASE("velocity converges at second order on coarse meshes") {
    std::vector<double> e, hs;
    for (int n : {8, 16, 32}) {
        e.push_back(solve_case(n, 1, 100.0).vel_l2_interp);
        hs.push_back(1.0 / n);
    }
    const double rate = observed_rate(e, hs);
    CHECK(rate > 1.7);
    CHECK(rate < 2.7);
}

TEST_CASE("pressure stagnates for a tiny delta") {
    std::vector<double> e, hs;
    for (int n : {20, 40, 80}) {
        e.push_back(solve_case(n, 1, 1000.0).pres_l2_interp);
        hs.push_back(1.0 / n);
    }
    CHECK(observed_rate(e, hs) < 0.5);
}

TEST_CASE("parameter optimum at N = 80") {
    SteadyErrors e[4];
    const double rhos[4] = {1.0, 10.0, 100.0, 1000.0};
    for (int k = 0; k < 4; ++k) e[k] = solve_case(80, 1, rhos[k]);
    CHECK(e[2].vel_l2_interp <= e[0].vel_l2_interp);
    CHECK(e[2].vel_l2_interp <= e[3].vel_l2_interp);
    CHECK(e[1].pres_l2_interp <= e[0].pres_l2_interp);
    CHECK(e[1].pres_l2_interp <= e[3].pres_l2_interp);
}

TEST_CASE("linear and quadratic elements agree for small rho") {
    const double p1 = solve_case(20, 1, 1.0).vel_l2_interp;
    const double p2 = solve_case(20, 2, 1.0).vel_l2_interp;
    CHECK(std::max(p1, p2) <= 1.5 * std::min(p1, p2));
}

}
