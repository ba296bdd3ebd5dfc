#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pstokes/schemes.hpp"
#include "pstokes/steady.hpp"

using namespace pstokes;

namespace {

constexpr double kNu = 0.01;

SchemeParams params_for(int n, double rho, double ratio, double final_time, SchemeKind kind,
                        InitKind init = InitKind::stabilized_stokes, StepGuard guard = StepGuard::standard) {
    SchemeParams p;
    p.nu = kNu;
    p.delta = choose_delta(1.0 / n, kNu, rho);
    p.dt = ratio * p.delta;
    p.final_time = final_time > 0 ? final_time : p.dt;
    p.scheme = kind;
    p.init = init;
    p.guard = guard;
    return p;
}

TimeState random_state(const Discretization& d, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> free(d.velocity.num_free());
    for (double& x : free) x = u(rng);
    TimeState s;
    s.velocity = d.velocity.extend_from_free(free);
    s.pressure.assign(d.pressure.num_dofs(), 0.0);
    s.pressure_prev = s.pressure;
    return s;
}

std::vector<double> minus(std::vector<double> a, std::span<const double> b, double scale = 1.0) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= scale * b[i];
    return a;
}

}  // namespace

TEST_SUITE("schemes") {

TEST_CASE("parameter validation and step guard") {
    SchemeParams p;
    p.delta = 1.0;
    p.dt = 3.0;
    p.final_time = 3.0;
    try {
        p.validate();
        FAIL("dt = 3 delta must be rejected");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("2 delta") != std::string::npos);
    }
    p.guard = StepGuard::relaxed;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.guard = StepGuard::unstable;
    CHECK_NOTHROW(p.validate());

    p.dt = 1.5;
    p.final_time = 3.0;
    p.guard = StepGuard::standard;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.guard = StepGuard::relaxed;
    CHECK_NOTHROW(p.validate());
    CHECK(p.guard_warning().has_value());
    p.dt = 1.0;
    CHECK_FALSE(p.guard_warning().has_value());

    p.final_time = 2.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.final_time = 3.0;
    p.delta = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.delta = 1.0;
    p.nu = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.nu = kNu;
    p.scheme = SchemeKind::inc;
    p.delta2 = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.delta2 = 0.0;
    CHECK_NOTHROW(p.validate());
    CHECK(p.num_steps() == 3);
}

TEST_CASE("names round-trip") {
    for (auto k : {SchemeKind::noninc, SchemeKind::inc}) CHECK(parse_scheme_kind(to_string(k)) == k);
    for (auto k : {InitKind::interpolant, InitKind::stabilized_stokes, InitKind::zero_pressure}) {
        CHECK(parse_init_kind(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_scheme_kind("chorin"), std::invalid_argument);
    CHECK_THROWS_AS(parse_init_kind("random"), std::invalid_argument);
}

TEST_CASE("initialization") {
    const auto d = Discretization::build(build_grid(6), 1);
    const ManufacturedCase mms(kNu);
    const auto zp = ProjectionScheme(d, params_for(6, 10, 1, 0, SchemeKind::noninc, InitKind::zero_pressure))
                        .initialize(mms);
    for (double q : zp.pressure) CHECK(q == 0.0);
    const auto ip = ProjectionScheme(d, params_for(6, 10, 1, 0, SchemeKind::noninc, InitKind::interpolant))
                        .initialize(mms);
    CHECK(std::abs(dot(ip.pressure, d.pressure_weights)) < 1e-15);
    CHECK(ip.velocity == zp.velocity);

    const ManufacturedCase zero(kNu, ManufacturedCase::Variant::zero);
    const auto ss = ProjectionScheme(d, params_for(6, 10, 1, 0, SchemeKind::noninc)).initialize(zero);
    for (double v : ss.velocity) CHECK(v == 0.0);
    for (double q : ss.pressure) CHECK(q == 0.0);
    CHECK(ss.pressure_prev == ss.pressure);
}

TEST_CASE("zero data stays zero") {
    const auto d = Discretization::build(build_grid(5), 2);
    const ManufacturedCase zero(kNu, ManufacturedCase::Variant::zero);
    for (auto kind : {SchemeKind::noninc, SchemeKind::inc}) {
        const ProjectionScheme s(d, params_for(5, 10, 1, 0, kind));
        RunOptions opt;
        opt.max_steps = 5;
        const auto tr = s.run(zero, opt);
        CHECK(tr.steps_taken == 1);
        for (double v : tr.final_state.velocity) CHECK(v == 0.0);
        for (double q : tr.final_state.pressure) CHECK(q == 0.0);
    }
}

TEST_CASE("final time equal to dt takes exactly one step") {
    const auto d = Discretization::build(build_grid(4), 1);
    const auto tr = ProjectionScheme(d, params_for(4, 10, 1, 0, SchemeKind::noninc)).run(ManufacturedCase(kNu));
    CHECK(tr.steps_taken == 1);
    CHECK(tr.records.size() == 2);
    CHECK(tr.records[0].n == 0);
    CHECK(tr.records[1].n == 1);
    CHECK_FALSE(tr.diverged);
}

TEST_CASE("record thinning keeps first and last levels") {
    const auto d = Discretization::build(build_grid(4), 1);
    auto p = params_for(4, 10, 1, 0, SchemeKind::noninc);
    p.final_time = 7 * p.dt;
    RunOptions opt;
    opt.record_every = 3;
    const auto tr = ProjectionScheme(d, p).run(ManufacturedCase(kNu), opt);
    std::vector<int> ns;
    for (const auto& r : tr.records) ns.push_back(r.n);
    CHECK(ns == std::vector<int>{0, 3, 6, 7});
}

TEST_CASE("free decay: the velocity M-norm never grows") {
    const ManufacturedCase zero(kNu, ManufacturedCase::Variant::zero);
    for (int deg : {1, 2}) {
        const int n = 8;
        const auto d = Discretization::build(build_grid(n), deg);
        for (auto kind : {SchemeKind::noninc, SchemeKind::inc}) {
            for (double ratio : {1.0, 0.5}) {
                auto p = params_for(n, 10, ratio, 0, kind);
                p.final_time = 100 * p.dt;
                double prev = -1.0;
                int violations = 0;
                ProjectionScheme(d, p).run_from(random_state(d, 31), zero, {},
                                                [&](const TimeState&, const ErrorRecord& r) {
                                                    if (prev >= 0.0 && r.velocity_energy > prev * (1.0 + 1e-12)) {
                                                        ++violations;
                                                    }
                                                    prev = r.velocity_energy;
                                                });
                CHECK(violations == 0);
            }
        }
    }
}

TEST_CASE("per-step residuals and zero-mean pressure") {
    const ManufacturedCase mms(kNu);
    const int n = 10;
    const auto d = Discretization::build(build_grid(n), 1);
    const auto gt = d.ops.gradient.transpose();
    for (auto kind : {SchemeKind::noninc, SchemeKind::inc}) {
        auto p = params_for(n, 10, 1, 0, kind);
        p.final_time = 20 * p.dt;
        const ProjectionScheme s(d, p);
        const ForcingLoads loads(d.velocity, mms.separable_forcing());
        TimeState st = s.initialize(mms);
        for (int k = 0; k < 20; ++k) {
            const TimeState next = s.step(st, loads.at((k + 1) * p.dt));
            const auto v = d.velocity.restrict_to_free(next.velocity);
            const auto gv = spmv(gt, v);
            auto res = spmv(d.ops.pressure_stiffness, next.pressure);
            if (kind == SchemeKind::noninc) {
                for (std::size_t i = 0; i < res.size(); ++i) res[i] = p.delta * res[i] - gv[i];
            } else {
                const auto sq = spmv(d.ops.pressure_stiffness, st.pressure);
                const double d2 = p.effective_delta2();
                for (std::size_t i = 0; i < res.size(); ++i) res[i] = (p.delta + d2) * res[i] - p.delta * sq[i] - gv[i];
            }
            CHECK(norm2(res) <= 1e-9 * norm2(gv));
            CHECK(std::abs(dot(next.pressure, d.pressure_weights)) <= 1e-11);
            CHECK(next.pressure_prev == st.pressure);
            CHECK(next.t == doctest::Approx((k + 1) * p.dt));
            st = next;
        }
    }
}

TEST_CASE("incremental iterates give non-incremental iterates through q^ = 2q^n - q^(n-1)") {
    const ManufacturedCase mms(kNu);
    const int n = 20;
    const auto d = Discretization::build(build_grid(n), 1);
    const auto gt = d.ops.gradient.transpose();
    auto p = params_for(n, 10, 1, 0, SchemeKind::inc);
    p.final_time = 50 * p.dt;
    const ProjectionScheme s(d, p);
    const ForcingLoads loads(d.velocity, mms.separable_forcing());
    const auto k = add(1.0 / p.dt, d.ops.mass, kNu, d.ops.stiffness);
    TimeState st = s.initialize(mms);
    double worst_m = 0.0, worst_p = 0.0;
    for (int step = 0; step < 50; ++step) {
        const auto f = loads.at((step + 1) * p.dt);
        const TimeState next = s.step(st, f);
        std::vector<double> qhat(st.pressure.size()), qn1(st.pressure.size());
        for (std::size_t i = 0; i < qhat.size(); ++i) {
            qhat[i] = 2 * st.pressure[i] - st.pressure_prev[i];
            qn1[i] = 2 * next.pressure[i] - st.pressure[i];
        }
        // (M/dt + nu A) v^{n+1} - M/dt v^n - F + G q^n  with q^n := q^.
        const auto v1 = d.velocity.restrict_to_free(next.velocity);
        const auto v0 = d.velocity.restrict_to_free(st.velocity);
        auto r = spmv(k, v1);
        const auto mv = spmv(d.ops.mass, v0);
        const auto gq = spmv(d.ops.gradient, qhat);
        std::vector<double> rhs(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            rhs[i] = mv[i] / p.dt + f[i] - gq[i];
            r[i] -= rhs[i];
        }
        worst_m = std::max(worst_m, norm2(r) / norm2(rhs));
        // delta S q^^{n+1} = G^T v^{n+1}.
        const auto gv = spmv(gt, v1);
        auto pr = spmv(d.ops.pressure_stiffness, qn1);
        for (std::size_t i = 0; i < pr.size(); ++i) pr[i] = p.delta * pr[i] - gv[i];
        worst_p = std::max(worst_p, norm2(pr) / norm2(gv));
        st = next;
    }
    CHECK(worst_m <= 1e-9);
    CHECK(worst_p <= 1e-9);
}

TEST_CASE("delta = dt reproduces the classical projection step") {
    // Independent dense implementation of: (v~^{n+1} - v^n)/dt - nu lap v~^{n+1} = g^{n+1},
    // v^{n+1} = v~^{n+1} - dt grad q^{n+1} with div v^{n+1} = 0 weakly, carrying
    // v^n explicitly as a field evaluated at quadrature points.
    const ManufacturedCase mms(kNu);
    const int n = 4;
    const auto d = Discretization::build(build_grid(n), 1);
    auto p = params_for(n, 10, 1, 0, SchemeKind::noninc, InitKind::interpolant);
    p.final_time = 10 * p.dt;
    const double dt = p.dt;
    SolverOptions direct;
    direct.velocity = LinearSolverKind::direct;
    const ProjectionScheme s(d, p, direct);
    const ForcingLoads loads(d.velocity, mms.separable_forcing());

    const auto ev = oracle::elements(d.velocity);
    const auto ep = oracle::elements(d.pressure);
    const auto ref = oracle::assemble(d.velocity, d.pressure);
    const auto mf = oracle::free_block(ref.mass_v, d.velocity);
    const auto af = oracle::free_block(ref.stiff_v, d.velocity);
    oracle::Dense k(mf.rows, mf.cols);
    for (std::size_t i = 0; i < k.a.size(); ++i) k.a[i] = mf.a[i] / dt + kNu * af.a[i];
    const std::size_t np = d.pressure.num_dofs(), nn = d.velocity.num_nodes();
    // Bordered pressure system [dt S, w; w^T, 0] with integral-mean weights.
    oracle::Dense sb(np + 1, np + 1);
    for (std::size_t i = 0; i < np; ++i) {
        double w = 0.0;
        for (std::size_t j = 0; j < np; ++j) {
            sb(i, j) = dt * ref.stiff_p(i, j);
            w += ref.mass_p(i, j);
        }
        sb(i, np) = sb(np, i) = w;
    }
    const auto rule = oracle::duffy_rule(6);
    const auto& fidx = d.velocity.free_index();

    // (vt - dt grad q, phi_i) and (vt, grad psi_mu) by quadrature of the fields.
    auto project_terms = [&](const std::vector<double>& vt_full, const std::vector<double>& q,
                             std::vector<double>& vphi, std::vector<double>& vgrad) {
        vphi.assign(d.velocity.num_free(), 0.0);
        vgrad.assign(np, 0.0);
        for (std::size_t t = 0; t < ev.size(); ++t) {
            const auto& E = ev[t];
            const auto& P = ep[t];
            for (std::size_t qp = 0; qp < rule.w.size(); ++qp) {
                const auto x = E.map(rule.pts[qp][0], rule.pts[qp][1]);
                const double w = rule.w[qp] * 2.0 * E.area;
                double vx[2] = {0.0, 0.0}, gq[2] = {0.0, 0.0};
                for (std::size_t a = 0; a < E.basis.size(); ++a) {
                    const double phi = E.basis.value(a, x[0], x[1]);
                    for (int c = 0; c < 2; ++c) vx[c] += vt_full[c * nn + E.nodes[a]] * phi;
                }
                for (std::size_t m = 0; m < P.basis.size(); ++m) {
                    const auto g = P.basis.gradient(m, x[0], x[1]);
                    gq[0] += q[P.nodes[m]] * g[0];
                    gq[1] += q[P.nodes[m]] * g[1];
                }
                for (std::size_t a = 0; a < E.basis.size(); ++a) {
                    const double phi = E.basis.value(a, x[0], x[1]);
                    for (int c = 0; c < 2; ++c) {
                        const int f = fidx[c * nn + E.nodes[a]];
                        if (f >= 0) vphi[f] += w * (vx[c] - dt * gq[c]) * phi;
                    }
                }
                for (std::size_t m = 0; m < P.basis.size(); ++m) {
                    const auto g = P.basis.gradient(m, x[0], x[1]);
                    vgrad[P.nodes[m]] += w * (vx[0] * g[0] + vx[1] * g[1]);
                }
            }
        }
    };

    TimeState lib = s.initialize(mms);
    std::vector<double> vt = lib.velocity, q = lib.pressure;
    double worst = 0.0, scale = 0.0;
    for (int step = 0; step < 10; ++step) {
        const auto f = loads.at((step + 1) * dt);
        std::vector<double> vphi, vgrad;
        project_terms(vt, q, vphi, vgrad);
        std::vector<double> rhs(vphi.size());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = vphi[i] / dt + f[i];
        vt = d.velocity.extend_from_free(oracle::dense_solve(k, rhs));
        project_terms(vt, std::vector<double>(np, 0.0), vphi, vgrad);
        vgrad.push_back(0.0);
        auto sol = oracle::dense_solve(sb, vgrad);
        q.assign(sol.begin(), sol.begin() + static_cast<long>(np));

        lib = s.step_noninc(lib, f);
        for (std::size_t i = 0; i < vt.size(); ++i) {
            worst = std::max(worst, std::abs(vt[i] - lib.velocity[i]));
            scale = std::max(scale, std::abs(vt[i]));
        }
    }
    CHECK(scale > 1e-3);
    CHECK(worst <= 1e-12 * std::max(scale, 1.0));
}

TEST_CASE("iterative and direct linear solvers give the same trajectory") {
    const ManufacturedCase mms(kNu);
    const int n = 12;
    const auto d = Discretization::build(build_grid(n), 2);
    for (auto kind : {SchemeKind::noninc, SchemeKind::inc}) {
        auto p = params_for(n, 10, 1, 0, kind);
        p.final_time = 15 * p.dt;
        SolverOptions a, b;
        a.velocity = LinearSolverKind::cg;
        a.pressure = LinearSolverKind::cg;
        b.velocity = LinearSolverKind::direct;
        b.pressure = LinearSolverKind::direct;
        const auto ta = ProjectionScheme(d, p, a).run(mms);
        const auto tb = ProjectionScheme(d, p, b).run(mms);
        const auto dv = minus(ta.final_state.velocity, tb.final_state.velocity);
        const auto dq = minus(ta.final_state.pressure, tb.final_state.pressure);
        CHECK(norm2(dv) <= 1e-8 * norm2(tb.final_state.velocity));
        CHECK(norm2(dq) <= 1e-8 * norm2(tb.final_state.pressure));
    }
}

TEST_CASE("runs are deterministic") {
    const ManufacturedCase mms(kNu);
    const auto d = Discretization::build(build_grid(8), 1);
    auto p = params_for(8, 10, 1, 0, SchemeKind::inc);
    p.final_time = 5 * p.dt;
    const auto a = ProjectionScheme(d, p).run(mms);
    const auto b = ProjectionScheme(d, p).run(mms);
    CHECK(a.final_state.velocity == b.final_state.velocity);
    CHECK(a.final_state.pressure == b.final_state.pressure);
}

TEST_CASE("large steps blow up and are flagged") {
    const ManufacturedCase mms(kNu);
    const int n = 16;
    const auto d = Discretization::build(build_grid(n), 1);
    RunOptions opt;
    opt.energy_ceiling = 1e12;
    auto big = params_for(n, 10, 4.0, 0, SchemeKind::noninc, InitKind::stabilized_stokes, StepGuard::unstable);
    big.final_time = 500 * big.dt;
    const auto tb = ProjectionScheme(d, big).run(mms, opt);
    CHECK(tb.diverged);
    CHECK(tb.steps_taken < 500);
    auto ok = params_for(n, 10, 1.0, 0, SchemeKind::noninc);
    ok.final_time = 200 * ok.dt;
    const auto to = ProjectionScheme(d, ok).run(mms, opt);
    CHECK_FALSE(to.diverged);
    CHECK(to.steps_taken == 200);
}

}
