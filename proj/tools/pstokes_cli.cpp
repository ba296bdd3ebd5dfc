// pstokes: experiment driver for the projection schemes.
//
//   pstokes steady-sweep          [--config FILE] [--out FILE]
//   pstokes transient-init        [--config FILE] [--out FILE]
//   pstokes transient-convergence [--config FILE] [--out FILE]
//   pstokes stability-probe       [--config FILE] [--out FILE] [--allow-unstable]
//
// Exit status: 0 when the run completed (failed cells and divergences are
// recorded in the CSV), 2 on configuration errors, 3 on I/O or other
// infrastructure errors.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pstokes/experiments.hpp"
#include "pstokes/mesh.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kInfraError = 3;

struct Options {
    std::string config;
    std::string out;
    std::string mesh_dump;
    bool allow_unstable = false;
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "Experiment configuration file (defaults apply when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "CSV output path (overrides the config; stdout when neither is set)");
    sub->add_flag("--allow-unstable", o.allow_unstable, "Accept dt > 2 delta (for stability probes)");
    sub->add_option("--dump-mesh", o.mesh_dump, "Also write the first configured mesh as 'nv nt', vertices, triangles");
}

int run(pstokes::ExperimentKind kind, const Options& o) {
    using namespace pstokes;
    ConfigOverrides ov;
    ov.kind = kind;
    ov.allow_unstable = o.allow_unstable;
    if (!o.out.empty()) ov.output = o.out;

    ExperimentConfig cfg;
    try {
        cfg = o.config.empty() ? parse_config_text("", ov) : parse_config(o.config, ov);
    } catch (const ConfigError& e) {
        std::cerr << "pstokes: config error: " << (o.config.empty() ? "" : o.config + ": ") << e.what() << '\n';
        return kConfigError;
    }

    if (!o.mesh_dump.empty()) {
        std::ofstream m(o.mesh_dump);
        if (!m) {
            std::cerr << "pstokes: cannot write mesh dump '" << o.mesh_dump << "'\n";
            return kInfraError;
        }
        build_grid(cfg.meshes.front())->write(m);
    }

    CsvTable table;
    try {
        table = run_experiment(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "pstokes: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "pstokes: " << e.what() << '\n';
        return kInfraError;
    }
    for (const auto& w : table.warnings) std::cerr << "pstokes: warning: " << w << '\n';

    const std::string csv = format_csv(cfg, table);
    if (cfg.output.empty()) {
        std::cout << csv;
        std::cout.flush();
        return std::cout ? 0 : kInfraError;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    out << csv;
    out.close();
    if (!out) {
        std::cerr << "pstokes: cannot write '" << cfg.output << "'\n";
        return kInfraError;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stabilized projection schemes for transient Stokes: experiment driver"};
    app.require_subcommand(1);

    Options o;
    const std::pair<const char*, pstokes::ExperimentKind> commands[] = {
        {"steady-sweep", pstokes::ExperimentKind::steady_sweep},
        {"transient-init", pstokes::ExperimentKind::transient_init},
        {"transient-convergence", pstokes::ExperimentKind::transient_convergence},
        {"stability-probe", pstokes::ExperimentKind::stability_probe},
    };
    const char* help[] = {
        "Steady stabilized Stokes errors over (degree, N, rho), with observed rates",
        "Per-step errors of the non-incremental scheme for each initialization",
        "Time-integrated errors and rates of a projection scheme",
        "Velocity energy for several dt/delta ratios, with divergence detection",
    };
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        subs.push_back(app.add_subcommand(commands[i].first, help[i]));
        add_common(subs.back(), o);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (subs[i]->parsed()) return run(commands[i].second, o);
    }
    return kConfigError;
}
