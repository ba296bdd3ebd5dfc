#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pstokes/mms.hpp"
#include "pstokes/schemes.hpp"

namespace pstokes {

enum class ExperimentKind { steady_sweep, transient_init, transient_convergence, stability_probe };
/// dt = delta per mesh, or a fixed dt.
enum class DtLaw { equal_delta, fixed };
/// delta2 = delta, or delta = dt with an independent delta2 = h^2/(nu rho^2).
enum class Delta2Law { equal_delta, rho };

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

/// Configuration error; line() is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::steady_sweep;
    std::vector<int> meshes;
    std::vector<int> degrees;
    double nu = 0.01;
    std::vector<double> rhos;
    DtLaw dt_law = DtLaw::equal_delta;
    double dt = 0.0;
    double final_time = 0.0;
    SchemeKind scheme = SchemeKind::noninc;
    Delta2Law delta2_law = Delta2Law::equal_delta;
    std::vector<InitKind> inits;
    std::vector<double> dt_ratios;
    int step_budget = 500;
    double energy_ceiling = 1e12;
    double tol = 1e-10;
    int record_every = 1;
    bool allow_relaxed_step = false;
    bool allow_unstable = false;
    ManufacturedCase::Variant mms = ManufacturedCase::Variant::corrected;
    std::string output;

    /// Documented defaults of each experiment kind.
    static ExperimentConfig defaults(ExperimentKind kind);
    bool operator==(const ExperimentConfig&) const = default;
};

/// Settings supplied outside the file (CLI subcommand and flags).
struct ConfigOverrides {
    std::optional<ExperimentKind> kind;
    std::optional<std::string> output;
    bool allow_unstable = false;
};

/// Strict parse of the key-value format documented in README.md, then
/// validate(). Unknown keys, sections, or malformed values raise ConfigError
/// with the offending line number.
ExperimentConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides = {});
ExperimentConfig parse_config(const std::string& path, const ConfigOverrides& overrides = {});
/// Serializes every resolved key; parse_config_text() of the result gives back an equal config.
std::string to_config_text(const ExperimentConfig& config);
/// Applies the step guard and parameter checks to every (N, rho) cell.
void validate(const ExperimentConfig& config);

/// Time-stepping parameters of one (N, rho) cell.
SchemeParams scheme_params_for(const ExperimentConfig& config, int n, double rho, double dt_ratio = 1.0);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    /// Guard and experimental-setting notices, echoed into the CSV header.
    std::vector<std::string> warnings;
};

CsvTable run_steady_sweep(const ExperimentConfig& config);
CsvTable run_transient_init(const ExperimentConfig& config);
CsvTable run_transient_convergence(const ExperimentConfig& config);
CsvTable run_stability_probe(const ExperimentConfig& config);
CsvTable run_experiment(const ExperimentConfig& config);

/// "# "-prefixed resolved config, then the column row, then the data rows.
std::string format_csv(const ExperimentConfig& config, const CsvTable& table);

}  // namespace pstokes
