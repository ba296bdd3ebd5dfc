#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pstokes/assembly.hpp"
#include "pstokes/metrics.hpp"
#include "pstokes/mms.hpp"

namespace pstokes {

enum class SchemeKind { noninc, inc };
enum class InitKind { interpolant, stabilized_stokes, zero_pressure };

/// Admissible time steps relative to delta:
///   standard  dt <= delta      (the analyzed regime)
///   relaxed   dt <= 2 delta    (still stable, accepted with a warning)
///   unstable  no limit         (stability probes only)
enum class StepGuard { standard, relaxed, unstable };

std::string to_string(SchemeKind k);
std::string to_string(InitKind k);
std::string to_string(StepGuard g);
SchemeKind parse_scheme_kind(const std::string& s);
InitKind parse_init_kind(const std::string& s);

struct SchemeParams {
    double nu = 0.01;
    double delta = 0.0;
    /// Second stabilization weight of the incremental scheme; defaults to delta.
    std::optional<double> delta2;
    double dt = 0.0;
    double final_time = 0.0;
    SchemeKind scheme = SchemeKind::noninc;
    InitKind init = InitKind::stabilized_stokes;
    StepGuard guard = StepGuard::standard;

    double effective_delta2() const { return delta2.value_or(delta); }
    /// Number of steps N with final_time = N dt.
    int num_steps() const;
    /// Throws std::invalid_argument when a parameter or the step guard is violated.
    void validate() const;
    /// Non-empty when dt lies in (delta, 2 delta].
    std::optional<std::string> guard_warning() const;
};

/// One time level: velocity on all DOFs (zero on the boundary), pressure
/// with zero integral mean, and for the incremental scheme the previous
/// pressure level.
struct TimeState {
    int step = 0;
    double t = 0.0;
    std::vector<double> velocity;
    std::vector<double> pressure;
    std::vector<double> pressure_prev;
};

enum class LinearSolverKind { cg, direct };

struct SolverOptions {
    double tol = 1e-10;
    /// M/dt + nu A is SPD and well conditioned: Jacobi CG, warm-started.
    LinearSolverKind velocity = LinearSolverKind::cg;
    /// Singular S with constant kernel: cached pinned LDL^T or projected CG.
    LinearSolverKind pressure = LinearSolverKind::direct;
};

class StepError : public std::runtime_error {
public:
    StepError(int step, const std::string& what)
        : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

struct RunOptions {
    /// Stop (and mark diverged) once the velocity energy exceeds this
    /// multiple of the initial energy, or becomes non-finite.
    double energy_ceiling = std::numeric_limits<double>::infinity();
    /// Upper bound on the number of steps; negative means params.num_steps().
    int max_steps = -1;
    /// Keep every k-th record (the first and last are always kept).
    int record_every = 1;
};

struct Trajectory {
    std::vector<ErrorRecord> records;  // includes the initial level n = 0
    TimeState final_state;
    bool diverged = false;
    int steps_taken = 0;
};

/// (g(t), chi) on free velocity DOFs for a separable forcing; each spatial
/// term is assembled once.
class ForcingLoads {
public:
    ForcingLoads(const FeSpace& velocity, SeparableForcing forcing);
    std::vector<double> at(double t) const;

private:
    SeparableForcing forcing_;
    std::size_t size_;
    std::vector<std::vector<double>> loads_;
};

using StepObserver = std::function<void(const TimeState&, const ErrorRecord&)>;

/// Modified Euler projection schemes in eliminated form. Non-incremental:
///   (M/dt + nu A) v^{n+1} = M/dt v^n + F^{n+1} - G q^n
///   delta S q^{n+1} = G^T v^{n+1}
/// Incremental (second weight delta2):
///   (M/dt + nu A) v^{n+1} = M/dt v^n + F^{n+1} - G (2 q^n - q^{n-1})
///   (delta + delta2) S q^{n+1} = delta S q^n + G^T v^{n+1}
/// The first incremental step uses q^{-1} = q^0.
class ProjectionScheme {
public:
    ProjectionScheme(const Discretization& disc, SchemeParams params, SolverOptions options = {});

    const SchemeParams& params() const { return params_; }
    const Discretization& discretization() const { return *disc_; }

    /// Initial level for the manufactured case according to params().init.
    TimeState initialize(const ManufacturedCase& mms) const;

    /// Advance one step; load_next = (g^{n+1}, chi) on free velocity DOFs.
    TimeState step(const TimeState& state, std::span<const double> load_next) const;
    TimeState step_noninc(const TimeState& state, std::span<const double> load_next) const;
    TimeState step_inc(const TimeState& state, std::span<const double> load_next) const;

    /// Runs from initialize(mms) with the manufactured forcing.
    Trajectory run(const ManufacturedCase& mms, const RunOptions& options = {},
                   const StepObserver& observer = {}) const;
    /// Runs from a given state; errors are measured against mms.
    Trajectory run_from(TimeState initial, const ManufacturedCase& mms, const RunOptions& options = {},
                        const StepObserver& observer = {}) const;

private:
    std::vector<double> solve_velocity(const TimeState& state, std::span<const double> load_next,
                                       std::span<const double> pressure_term) const;
    std::vector<double> solve_pressure(std::vector<double> rhs) const;

    const Discretization* disc_;
    SchemeParams params_;
    SolverOptions options_;
    SparseMatrix velocity_operator_;  // M/dt + nu A
    SparseMatrix gradient_transpose_;
    std::optional<DirectSolver> velocity_direct_;
    std::optional<DirectSolver> pressure_direct_;
};

}  // namespace pstokes
