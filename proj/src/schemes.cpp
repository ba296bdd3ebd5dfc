#include "pstokes/schemes.hpp"

#include <cmath>
#include <sstream>

#include "pstokes/steady.hpp"

namespace pstokes {

namespace {

constexpr double kGuardSlack = 1e-12;

}  // namespace

std::string to_string(SchemeKind k) { return k == SchemeKind::noninc ? "noninc" : "inc"; }

std::string to_string(InitKind k) {
    switch (k) {
        case InitKind::interpolant: return "interpolant";
        case InitKind::stabilized_stokes: return "stabilized_stokes";
        case InitKind::zero_pressure: return "zero_pressure";
    }
    return "?";
}

std::string to_string(StepGuard g) {
    switch (g) {
        case StepGuard::standard: return "standard";
        case StepGuard::relaxed: return "relaxed";
        case StepGuard::unstable: return "unstable";
    }
    return "?";
}

SchemeKind parse_scheme_kind(const std::string& s) {
    if (s == "noninc") return SchemeKind::noninc;
    if (s == "inc") return SchemeKind::inc;
    throw std::invalid_argument("unknown scheme '" + s + "' (expected noninc or inc)");
}

InitKind parse_init_kind(const std::string& s) {
    if (s == "interpolant") return InitKind::interpolant;
    if (s == "stabilized_stokes") return InitKind::stabilized_stokes;
    if (s == "zero_pressure") return InitKind::zero_pressure;
    throw std::invalid_argument("unknown init '" + s + "' (expected interpolant, stabilized_stokes or zero_pressure)");
}

int SchemeParams::num_steps() const { return static_cast<int>(std::llround(final_time / dt)); }

void SchemeParams::validate() const {
    if (!(nu > 0.0)) throw std::invalid_argument("nu must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0 (pressure stabilization is required)");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(final_time > 0.0)) throw std::invalid_argument("final time must be > 0");
    if (scheme == SchemeKind::inc && !(effective_delta2() >= 0.0)) {
        throw std::invalid_argument("delta2 must be >= 0");
    }
    const int n = num_steps();
    if (n < 1 || std::abs(n * dt - final_time) > 1e-9 * final_time) {
        std::ostringstream os;
        os << "final time " << final_time << " is not an integer multiple of dt " << dt;
        throw std::invalid_argument(os.str());
    }
    const double ratio = dt / delta;
    if (guard != StepGuard::unstable && ratio > 2.0 * (1.0 + kGuardSlack)) {
        std::ostringstream os;
        os << "dt/delta = " << ratio << " exceeds the stability threshold dt <= 2 delta; "
           << "the scheme is unstable beyond 2 delta (use the allow-unstable override for stability probes)";
        throw std::invalid_argument(os.str());
    }
    if (guard == StepGuard::standard && ratio > 1.0 + kGuardSlack) {
        std::ostringstream os;
        os << "dt/delta = " << ratio << " violates dt <= delta; dt <= 2 delta is accepted only with the "
           << "relaxed step guard";
        throw std::invalid_argument(os.str());
    }
}

std::optional<std::string> SchemeParams::guard_warning() const {
    const double ratio = dt / delta;
    if (ratio > 1.0 + kGuardSlack && ratio <= 2.0 * (1.0 + kGuardSlack)) {
        std::ostringstream os;
        os << "warning: dt/delta = " << ratio << " lies in (1, 2]; outside the analyzed regime dt <= delta";
        return os.str();
    }
    return std::nullopt;
}

ForcingLoads::ForcingLoads(const FeSpace& velocity, SeparableForcing forcing)
    : forcing_(std::move(forcing)), size_(velocity.num_free()) {
    for (const auto& term : forcing_.terms) loads_.push_back(assemble_load(velocity, term.field, Dofs::free));
}

std::vector<double> ForcingLoads::at(double t) const {
    std::vector<double> out(size_, 0.0);
    for (std::size_t k = 0; k < loads_.size(); ++k) {
        const double a = forcing_.terms[k].amplitude(t);
        for (std::size_t i = 0; i < size_; ++i) out[i] += a * loads_[k][i];
    }
    return out;
}

ProjectionScheme::ProjectionScheme(const Discretization& disc, SchemeParams params, SolverOptions options)
    : disc_(&disc), params_(params), options_(options) {
    params_.validate();
    velocity_operator_ = add(1.0 / params_.dt, disc.ops.mass, params_.nu, disc.ops.stiffness);
    gradient_transpose_ = disc.ops.gradient.transpose();
    if (options_.velocity == LinearSolverKind::direct) velocity_direct_.emplace(velocity_operator_);
    if (options_.pressure == LinearSolverKind::direct) pressure_direct_.emplace(disc.ops.pressure_stiffness, 0);
}

TimeState ProjectionScheme::initialize(const ManufacturedCase& mms) const {
    const Discretization& d = *disc_;
    TimeState st;
    const VectorField v0 = [&mms](double x, double y) { return mms.v(x, y, 0.0); };
    switch (params_.init) {
        case InitKind::interpolant:
        case InitKind::zero_pressure: {
            st.velocity = interpolate(d.velocity, v0);
            for (std::size_t i = 0; i < st.velocity.size(); ++i) {
                if (d.velocity.is_dirichlet(static_cast<int>(i))) st.velocity[i] = 0.0;
            }
            if (params_.init == InitKind::interpolant) {
                st.pressure = interpolate(d.pressure, ScalarField([&mms](double x, double y) { return mms.q(x, y, 0.0); }));
                remove_mean(st.pressure, d.pressure_weights);
            } else {
                st.pressure.assign(d.pressure.num_dofs(), 0.0);
            }
            break;
        }
        case InitKind::stabilized_stokes: {
            // Steady data g(0) - v_t(0) has (v(0), q(0)) as its exact solution.
            const VectorField ghat = [&mms](double x, double y) {
                const Vec2 g = mms.transient_forcing(x, y, 0.0);
                const Vec2 vt = mms.vt(x, y, 0.0);
                return Vec2{g[0] - vt[0], g[1] - vt[1]};
            };
            auto sol = solve_stabilized_stokes(d, params_.nu, params_.delta, ghat, options_.tol);
            st.velocity = std::move(sol.velocity);
            st.pressure = std::move(sol.pressure);
            break;
        }
    }
    st.pressure_prev = st.pressure;
    return st;
}

std::vector<double> ProjectionScheme::solve_velocity(const TimeState& state, std::span<const double> load_next,
                                                     std::span<const double> pressure_term) const {
    const Discretization& d = *disc_;
    const auto v_free = d.velocity.restrict_to_free(state.velocity);
    auto rhs = spmv(d.ops.mass, v_free);
    const auto gq = spmv(d.ops.gradient, pressure_term);
    const double inv_dt = 1.0 / params_.dt;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = inv_dt * rhs[i] + load_next[i] - gq[i];
    if (velocity_direct_) return velocity_direct_->solve(rhs);
    CgOptions opt;
    opt.tol = options_.tol;
    return cg_solve(velocity_operator_, rhs, opt, v_free).x;
}

std::vector<double> ProjectionScheme::solve_pressure(std::vector<double> rhs) const {
    std::vector<double> q;
    if (pressure_direct_) {
        q = pressure_direct_->solve(rhs);
    } else {
        CgOptions opt;
        opt.tol = options_.tol;
        opt.project_out_constants = true;
        q = cg_solve(disc_->ops.pressure_stiffness, rhs, opt).x;
    }
    remove_mean(q, disc_->pressure_weights);
    return q;
}

TimeState ProjectionScheme::step(const TimeState& state, std::span<const double> load_next) const {
    return params_.scheme == SchemeKind::noninc ? step_noninc(state, load_next) : step_inc(state, load_next);
}

TimeState ProjectionScheme::step_noninc(const TimeState& state, std::span<const double> load_next) const {
    const Discretization& d = *disc_;
    try {
        TimeState next;
        next.step = state.step + 1;
        next.t = next.step * params_.dt;
        const auto v = solve_velocity(state, load_next, state.pressure);
        auto rhs = spmv(gradient_transpose_, v);
        for (double& x : rhs) x /= params_.delta;
        next.pressure = solve_pressure(std::move(rhs));
        next.velocity = d.velocity.extend_from_free(v);
        next.pressure_prev = state.pressure;
        return next;
    } catch (const SolveError& e) {
        throw StepError(state.step + 1, e.what());
    }
}

TimeState ProjectionScheme::step_inc(const TimeState& state, std::span<const double> load_next) const {
    const Discretization& d = *disc_;
    const double delta = params_.delta;
    const double delta2 = params_.effective_delta2();
    if (!(delta + delta2 > 0.0)) throw std::invalid_argument("step_inc: delta = delta2 = 0 gives no stabilization");
    try {
        TimeState next;
        next.step = state.step + 1;
        next.t = next.step * params_.dt;
        std::vector<double> extrapolated(state.pressure.size());
        for (std::size_t i = 0; i < extrapolated.size(); ++i) {
            extrapolated[i] = 2.0 * state.pressure[i] - state.pressure_prev[i];
        }
        const auto v = solve_velocity(state, load_next, extrapolated);
        auto rhs = spmv(gradient_transpose_, v);
        const auto sq = spmv(d.ops.pressure_stiffness, state.pressure);
        const double scale = 1.0 / (delta + delta2);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = scale * (rhs[i] + delta * sq[i]);
        next.pressure = solve_pressure(std::move(rhs));
        next.velocity = d.velocity.extend_from_free(v);
        next.pressure_prev = state.pressure;
        return next;
    } catch (const SolveError& e) {
        throw StepError(state.step + 1, e.what());
    }
}

Trajectory ProjectionScheme::run(const ManufacturedCase& mms, const RunOptions& options,
                                 const StepObserver& observer) const {
    return run_from(initialize(mms), mms, options, observer);
}

Trajectory ProjectionScheme::run_from(TimeState state, const ManufacturedCase& mms, const RunOptions& options,
                                      const StepObserver& observer) const {
    const Discretization& d = *disc_;
    const TransientErrorTracker tracker(d, mms);
    const ForcingLoads loads(d.velocity, mms.separable_forcing());
    int steps = params_.num_steps();
    if (options.max_steps >= 0) steps = std::min(steps, options.max_steps);
    const int every = std::max(options.record_every, 1);

    Trajectory traj;
    ErrorRecord rec = tracker.evaluate(state.step, state.t, state.velocity, state.pressure);
    const double e0 = rec.velocity_energy;
    traj.records.push_back(rec);
    if (observer) observer(state, rec);

    for (int k = 0; k < steps; ++k) {
        const double t_next = (state.step + 1) * params_.dt;
        state = step(state, loads.at(t_next));
        rec = tracker.evaluate(state.step, state.t, state.velocity, state.pressure);
        ++traj.steps_taken;
        if (observer) observer(state, rec);
        const bool blown = !std::isfinite(rec.velocity_energy) ||
                           (e0 > 0.0 ? rec.velocity_energy > options.energy_ceiling * e0
                                     : rec.velocity_energy > options.energy_ceiling);
        const bool last = blown || k + 1 == steps;
        if (last || traj.steps_taken % every == 0) traj.records.push_back(rec);
        if (blown) {
            traj.diverged = true;
            break;
        }
    }
    traj.final_state = std::move(state);
    return traj;
}

}  // namespace pstokes
