#include "pstokes/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "pstokes/steady.hpp"

namespace pstokes {

namespace {

const double kNan = std::numeric_limits<double>::quiet_NaN();

// ---- value formatting -------------------------------------------------------

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string num(int v) { return std::to_string(v); }

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += fmt(xs[i]);
    }
    return out;
}

std::string to_string(DtLaw d) { return d == DtLaw::equal_delta ? "equal_delta" : "fixed"; }
std::string to_string(Delta2Law d) { return d == Delta2Law::equal_delta ? "equal_delta" : "rho"; }

// Status cells must not break the CSV.
std::string status_text(const std::string& what) {
    std::string s = "failed: " + what;
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    }
    return s;
}

// ---- value parsing ----------------------------------------------------------

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v + ",") {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected a number, got '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected an integer, got '" + s + "'");
    }
    if (pos != s.size() || v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw std::invalid_argument("expected an integer, got '" + s + "'");
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    throw std::invalid_argument("expected true or false, got '" + s + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& v, F&& one) {
    std::vector<T> out;
    for (const auto& item : split_list(v)) out.push_back(one(item));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

DtLaw parse_dt_law(const std::string& s) {
    if (s == "equal_delta") return DtLaw::equal_delta;
    if (s == "fixed") return DtLaw::fixed;
    throw std::invalid_argument("unknown dt_law '" + s + "' (expected equal_delta or fixed)");
}

Delta2Law parse_delta2_law(const std::string& s) {
    if (s == "equal_delta") return Delta2Law::equal_delta;
    if (s == "rho") return Delta2Law::rho;
    throw std::invalid_argument("unknown delta2_law '" + s + "' (expected equal_delta or rho)");
}

// ---- key table --------------------------------------------------------------

struct Key {
    const char* name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        {"N", [](auto& c, auto& v) { c.meshes = parse_list<int>(v, parse_int); },
         [](auto& c) { return join(c.meshes, [](int x) { return num(x); }); }},
        {"degrees", [](auto& c, auto& v) { c.degrees = parse_list<int>(v, parse_int); },
         [](auto& c) { return join(c.degrees, [](int x) { return num(x); }); }},
        {"nu", [](auto& c, auto& v) { c.nu = parse_double(v); }, [](auto& c) { return num(c.nu); }},
        {"rho", [](auto& c, auto& v) { c.rhos = parse_list<double>(v, parse_double); },
         [](auto& c) { return join(c.rhos, [](double x) { return num(x); }); }},
        {"dt_law", [](auto& c, auto& v) { c.dt_law = parse_dt_law(v); },
         [](auto& c) { return to_string(c.dt_law); }},
        {"dt", [](auto& c, auto& v) { c.dt = parse_double(v); }, [](auto& c) { return num(c.dt); }},
        {"final_time", [](auto& c, auto& v) { c.final_time = parse_double(v); },
         [](auto& c) { return num(c.final_time); }},
        {"scheme", [](auto& c, auto& v) { c.scheme = parse_scheme_kind(v); },
         [](auto& c) { return to_string(c.scheme); }},
        {"delta2_law", [](auto& c, auto& v) { c.delta2_law = parse_delta2_law(v); },
         [](auto& c) { return to_string(c.delta2_law); }},
        {"inits", [](auto& c, auto& v) { c.inits = parse_list<InitKind>(v, parse_init_kind); },
         [](auto& c) { return join(c.inits, [](InitKind k) { return to_string(k); }); }},
        {"dt_ratios", [](auto& c, auto& v) { c.dt_ratios = parse_list<double>(v, parse_double); },
         [](auto& c) { return join(c.dt_ratios, [](double x) { return num(x); }); }},
        {"step_budget", [](auto& c, auto& v) { c.step_budget = parse_int(v); },
         [](auto& c) { return num(c.step_budget); }},
        {"energy_ceiling", [](auto& c, auto& v) { c.energy_ceiling = parse_double(v); },
         [](auto& c) { return num(c.energy_ceiling); }},
        {"tol", [](auto& c, auto& v) { c.tol = parse_double(v); }, [](auto& c) { return num(c.tol); }},
        {"record_every", [](auto& c, auto& v) { c.record_every = parse_int(v); },
         [](auto& c) { return num(c.record_every); }},
        {"allow_relaxed_step", [](auto& c, auto& v) { c.allow_relaxed_step = parse_bool(v); },
         [](auto& c) { return std::string(c.allow_relaxed_step ? "true" : "false"); }},
        {"allow_unstable", [](auto& c, auto& v) { c.allow_unstable = parse_bool(v); },
         [](auto& c) { return std::string(c.allow_unstable ? "true" : "false"); }},
        {"case", [](auto& c, auto& v) { c.mms = parse_case_variant(v); },
         [](auto& c) { return to_string(c.mms); }},
        {"output", [](auto& c, auto& v) { c.output = v; }, [](auto& c) { return c.output; }},
    };
    return table;
}

const Key* find_key(const std::string& name) {
    for (const auto& k : keys()) {
        if (name == k.name) return &k;
    }
    return nullptr;
}

struct Entry {
    std::string section;  // "" for the top level
    std::string key;
    std::string value;
    int line = 0;
};

bool is_kind_section(const std::string& s) {
    return s == "steady_sweep" || s == "transient_init" || s == "transient_convergence" || s == "stability_probe";
}

std::vector<Entry> tokenize(const std::string& text) {
    std::vector<Entry> out;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::map<std::pair<std::string, std::string>, int> seen;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        // '#' starts a comment at the beginning of a line or after whitespace.
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '#' && (i == 0 || raw[i - 1] == ' ' || raw[i - 1] == '\t')) {
                raw.resize(i);
                break;
            }
        }
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(line, "malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "common" && !is_kind_section(section)) {
                throw ConfigError(line, "unknown section [" + section + "]");
            }
            if (section == "common") section.clear();
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value', got '" + s + "'");
        Entry e{section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
        if (e.key.empty()) throw ConfigError(line, "missing key before '='");
        if (e.value.empty()) throw ConfigError(line, "missing value for key '" + e.key + "'");
        if (e.key == "experiment") {
            if (!section.empty()) throw ConfigError(line, "'experiment' is only allowed at the top level or in [common]");
        } else if (!find_key(e.key)) {
            throw ConfigError(line, "unknown key '" + e.key + "'");
        }
        const auto [it, fresh] = seen.emplace(std::make_pair(e.section, e.key), line);
        if (!fresh) {
            throw ConfigError(line, "duplicate key '" + e.key + "' (first set on line " + std::to_string(it->second) + ")");
        }
        out.push_back(std::move(e));
    }
    return out;
}

void apply(ExperimentConfig& c, const Entry& e) {
    try {
        find_key(e.key)->set(c, e.value);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(e.line, e.key + ": " + ex.what());
    }
}

StepGuard guard_of(const ExperimentConfig& c) {
    if (c.allow_unstable) return StepGuard::unstable;
    // A probe asks for dt/delta explicitly, so (delta, 2 delta] needs no extra flag.
    if (c.allow_relaxed_step || c.kind == ExperimentKind::stability_probe) return StepGuard::relaxed;
    return StepGuard::standard;
}

bool is_transient(ExperimentKind k) { return k != ExperimentKind::steady_sweep; }

std::vector<double> probe_ratios(const ExperimentConfig& c) {
    return c.kind == ExperimentKind::stability_probe ? c.dt_ratios : std::vector<double>{1.0};
}

// ---- rate summaries ---------------------------------------------------------

struct Series {
    std::vector<double> hs;
    std::vector<std::vector<double>> values;  // one vector per error column
};

std::vector<double> rates_of(const Series& s) {
    std::vector<double> out;
    for (const auto& v : s.values) {
        bool usable = s.hs.size() >= 2;
        for (double x : v) usable = usable && std::isfinite(x) && x > 0.0;
        out.push_back(usable ? observed_rate(v, s.hs) : kNan);
    }
    return out;
}

// Builds a row from (column, value) pairs; unmentioned columns are empty.
class RowBuilder {
public:
    explicit RowBuilder(const std::vector<std::string>& columns) : columns_(&columns), row_(columns.size()) {}
    RowBuilder& set(const std::string& name, std::string value) {
        for (std::size_t i = 0; i < columns_->size(); ++i) {
            if ((*columns_)[i] == name) {
                row_[i] = std::move(value);
                return *this;
            }
        }
        throw std::logic_error("no CSV column '" + name + "'");
    }
    RowBuilder& set(const std::string& name, double v) { return set(name, num(v)); }
    RowBuilder& set(const std::string& name, int v) { return set(name, num(v)); }
    std::vector<std::string> done() { return std::move(row_); }

private:
    const std::vector<std::string>* columns_;
    std::vector<std::string> row_;
};

void note(CsvTable& t, const std::string& w) {
    for (const auto& x : t.warnings) {
        if (x == w) return;
    }
    t.warnings.push_back(w);
}

}  // namespace

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::steady_sweep: return "steady_sweep";
        case ExperimentKind::transient_init: return "transient_init";
        case ExperimentKind::transient_convergence: return "transient_convergence";
        case ExperimentKind::stability_probe: return "stability_probe";
    }
    return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
    std::string k = s;
    for (char& c : k) {
        if (c == '-') c = '_';
    }
    if (k == "steady_sweep") return ExperimentKind::steady_sweep;
    if (k == "transient_init") return ExperimentKind::transient_init;
    if (k == "transient_convergence") return ExperimentKind::transient_convergence;
    if (k == "stability_probe") return ExperimentKind::stability_probe;
    throw std::invalid_argument("unknown experiment '" + s +
                                "' (expected steady_sweep, transient_init, transient_convergence or stability_probe)");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    c.degrees = {1};
    c.nu = 0.01;
    c.tol = 1e-10;
    switch (kind) {
        case ExperimentKind::steady_sweep:
            c.meshes = {20, 40, 80, 160};
            c.rhos = {100.0};
            break;
        case ExperimentKind::transient_init:
            c.meshes = {20, 40, 80};
            c.rhos = {10.0};
            c.final_time = 6.0;
            c.scheme = SchemeKind::noninc;
            c.inits = {InitKind::interpolant, InitKind::stabilized_stokes};
            break;
        case ExperimentKind::transient_convergence:
            c.meshes = {20, 40, 80};
            c.rhos = {10.0};
            c.final_time = 0.01;
            c.scheme = SchemeKind::inc;
            c.inits = {InitKind::stabilized_stokes};
            break;
        case ExperimentKind::stability_probe:
            c.meshes = {40};
            c.rhos = {10.0};
            c.scheme = SchemeKind::noninc;
            c.inits = {InitKind::stabilized_stokes};
            c.dt_ratios = {0.5, 1.0, 4.0};
            break;
    }
    return c;
}

SchemeParams scheme_params_for(const ExperimentConfig& c, int n, double rho, double dt_ratio) {
    const double h = 1.0 / n;
    SchemeParams p;
    p.nu = c.nu;
    p.scheme = c.scheme;
    p.init = c.inits.empty() ? InitKind::stabilized_stokes : c.inits.front();
    p.guard = guard_of(c);
    if (c.delta2_law == Delta2Law::rho) {
        p.delta = c.dt;
        p.delta2 = choose_delta(h, c.nu, rho);
        p.dt = c.dt;
    } else {
        p.delta = choose_delta(h, c.nu, rho);
        p.dt = c.dt_law == DtLaw::fixed ? c.dt : p.delta;
    }
    if (c.kind == ExperimentKind::stability_probe) {
        p.dt = dt_ratio * p.delta;
        p.final_time = c.step_budget * p.dt;
    } else {
        p.final_time = c.final_time;
    }
    return p;
}

void validate(const ExperimentConfig& c) {
    auto fail = [](const std::string& what) { throw ConfigError(0, what); };
    if (c.meshes.empty()) fail("N: at least one mesh size is required");
    for (int n : c.meshes) {
        if (n < 1) fail("N: mesh sizes must be >= 1");
    }
    if (c.degrees.empty()) fail("degrees: at least one degree is required");
    for (int d : c.degrees) {
        if (d != 1 && d != 2) fail("degrees: only 1 (P1/P1) and 2 (P2/P2) are supported");
    }
    if (!(c.nu > 0.0)) fail("nu must be > 0");
    if (c.rhos.empty()) fail("rho: at least one value is required");
    for (double r : c.rhos) {
        if (!(r > 0.0) || !std::isfinite(r)) fail("rho: values must be finite and > 0");
    }
    if (!(c.tol > 0.0)) fail("tol must be > 0");
    if (c.record_every < 1) fail("record_every must be >= 1");
    if (!is_transient(c.kind)) return;

    if (c.inits.empty()) fail("inits: at least one initialization is required");
    if (c.dt_law == DtLaw::fixed && !(c.dt > 0.0)) fail("dt must be > 0 when dt_law = fixed");
    if (c.delta2_law == Delta2Law::rho) {
        if (c.dt_law != DtLaw::fixed) fail("delta2_law = rho sets delta = dt and needs dt_law = fixed");
        if (c.scheme != SchemeKind::inc) fail("delta2_law = rho only applies to scheme = inc");
    }
    if (c.kind == ExperimentKind::stability_probe) {
        if (c.dt_ratios.empty()) fail("dt_ratios: at least one ratio is required");
        for (double r : c.dt_ratios) {
            if (!(r > 0.0) || !std::isfinite(r)) fail("dt_ratios: values must be finite and > 0");
        }
        if (c.step_budget < 1) fail("step_budget must be >= 1");
        if (!(c.energy_ceiling > 1.0)) fail("energy_ceiling must be > 1");
    } else if (!(c.final_time > 0.0)) {
        fail("final_time must be > 0");
    }
    for (int n : c.meshes) {
        for (double rho : c.rhos) {
            for (double ratio : probe_ratios(c)) {
                try {
                    scheme_params_for(c, n, rho, ratio).validate();
                } catch (const std::invalid_argument& e) {
                    std::ostringstream os;
                    os << "N = " << n << ", rho = " << num(rho);
                    if (c.kind == ExperimentKind::stability_probe) os << ", dt_ratio = " << num(ratio);
                    os << ": " << e.what();
                    fail(os.str());
                }
            }
        }
    }
}

ExperimentConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides) {
    const auto entries = tokenize(text);

    std::optional<ExperimentKind> file_kind;
    for (const auto& e : entries) {
        if (e.key != "experiment") continue;
        try {
            file_kind = parse_experiment_kind(e.value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(e.line, ex.what());
        }
        if (overrides.kind && *overrides.kind != *file_kind) {
            throw ConfigError(e.line, "experiment = " + e.value + " conflicts with the requested " +
                                          to_string(*overrides.kind));
        }
    }
    const ExperimentKind kind = overrides.kind.value_or(file_kind.value_or(ExperimentKind::steady_sweep));

    ExperimentConfig c = ExperimentConfig::defaults(kind);
    for (const auto& e : entries) {
        if (e.section.empty() && e.key != "experiment") apply(c, e);
    }
    for (const auto& e : entries) {
        if (e.section == to_string(kind)) {
            apply(c, e);
        } else if (!e.section.empty()) {
            // Sections of other experiments are still checked for well-formed values.
            ExperimentConfig scratch = ExperimentConfig::defaults(parse_experiment_kind(e.section));
            apply(scratch, e);
        }
    }
    if (overrides.output) c.output = *overrides.output;
    if (overrides.allow_unstable) c.allow_unstable = true;
    validate(c);
    return c;
}

ExperimentConfig parse_config(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), overrides);
}

std::string to_config_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "experiment = " << to_string(c.kind) << '\n';
    for (const auto& k : keys()) {
        const std::string v = k.get(c);
        if (v.empty()) continue;  // an empty output path means stdout
        os << k.name << " = " << v << '\n';
    }
    return os.str();
}

// ---- runners ----------------------------------------------------------------

CsvTable run_steady_sweep(const ExperimentConfig& c) {
    CsvTable t;
    t.columns = {"kind",          "status",         "degree",        "N",
                 "h",             "rho",            "delta",         "vel_l2_interp",
                 "pres_l2_interp", "vel_l2_exact",  "pres_l2_exact", "vel_h1_exact",
                 "pres_h1_exact", "rate_vel_l2_interp", "rate_pres_l2_interp", "rate_vel_l2_exact",
                 "rate_pres_l2_exact"};
    const ManufacturedCase mms(c.nu, c.mms);
    for (int degree : c.degrees) {
        std::map<double, Series> series;
        for (int n : c.meshes) {
            std::optional<Discretization> disc;
            std::string disc_error;
            try {
                disc.emplace(Discretization::build(build_grid(n), degree));
            } catch (const std::exception& e) {
                disc_error = e.what();
            }
            for (double rho : c.rhos) {
                const double h = 1.0 / n;
                const double delta = choose_delta(h, c.nu, rho);
                RowBuilder row(t.columns);
                row.set("kind", "data").set("degree", degree).set("N", n).set("h", h).set("rho", rho).set("delta",
                                                                                                          delta);
                try {
                    if (!disc) throw std::runtime_error(disc_error);
                    const VectorField g = [&mms](double x, double y) { return mms.steady_forcing(x, y); };
                    const auto sol = solve_stabilized_stokes(*disc, c.nu, delta, g, c.tol);
                    const auto e = steady_errors(*disc, sol, mms);
                    row.set("status", "ok")
                        .set("vel_l2_interp", e.vel_l2_interp)
                        .set("pres_l2_interp", e.pres_l2_interp)
                        .set("vel_l2_exact", e.vel_l2_exact)
                        .set("pres_l2_exact", e.pres_l2_exact)
                        .set("vel_h1_exact", e.vel_h1_exact)
                        .set("pres_h1_exact", e.pres_h1_exact);
                    auto& s = series[rho];
                    s.values.resize(4);
                    s.hs.push_back(h);
                    s.values[0].push_back(e.vel_l2_interp);
                    s.values[1].push_back(e.pres_l2_interp);
                    s.values[2].push_back(e.vel_l2_exact);
                    s.values[3].push_back(e.pres_l2_exact);
                } catch (const std::exception& e) {
                    row.set("status", status_text(e.what()));
                }
                t.rows.push_back(row.done());
            }
        }
        for (double rho : c.rhos) {
            Series s = series.count(rho) ? series[rho] : Series{{}, std::vector<std::vector<double>>(4)};
            const auto r = rates_of(s);
            RowBuilder row(t.columns);
            row.set("kind", "summary")
                .set("status", s.hs.size() >= 2 ? "ok" : "single_point")
                .set("degree", degree)
                .set("rho", rho)
                .set("rate_vel_l2_interp", r[0])
                .set("rate_pres_l2_interp", r[1])
                .set("rate_vel_l2_exact", r[2])
                .set("rate_pres_l2_exact", r[3]);
            t.rows.push_back(row.done());
        }
    }
    return t;
}

namespace {

double reported_rho(const ExperimentConfig& c, double h, const SchemeParams& p, double rho) {
    return c.delta2_law == Delta2Law::rho ? rho_of(h, c.nu, p.delta) : rho;
}

void note_params(CsvTable& t, const ExperimentConfig& c, const SchemeParams& p) {
    if (auto w = p.guard_warning()) note(t, *w);
    if (c.delta2_law == Delta2Law::rho) {
        note(t, "experimental: delta = dt with an independent delta2 = h^2/(nu rho^2) has no analyzed bounds");
    }
}

}  // namespace

CsvTable run_transient_init(const ExperimentConfig& c) {
    CsvTable t;
    t.columns = {"init",  "status", "scheme", "degree",         "N",             "h",
                 "rho",   "delta",  "dt",     "n",              "t",             "pres_l2_interp",
                 "vel_l2_interp", "pres_l2_exact", "vel_l2_exact"};
    const ManufacturedCase mms(c.nu, c.mms);
    for (int degree : c.degrees) {
        for (double rho : c.rhos) {
            for (InitKind init : c.inits) {
                for (int n : c.meshes) {
                    const double h = 1.0 / n;
                    SchemeParams p = scheme_params_for(c, n, rho);
                    p.init = init;
                    note_params(t, c, p);
                    auto base = [&](RowBuilder& row) {
                        row.set("init", to_string(init))
                            .set("scheme", to_string(p.scheme))
                            .set("degree", degree)
                            .set("N", n)
                            .set("h", h)
                            .set("rho", reported_rho(c, h, p, rho))
                            .set("delta", p.delta)
                            .set("dt", p.dt);
                    };
                    std::vector<std::vector<std::string>> rows;
                    try {
                        const auto disc = Discretization::build(build_grid(n), degree);
                        const ProjectionScheme scheme(disc, p, SolverOptions{c.tol});
                        RunOptions opt;
                        opt.record_every = c.record_every;
                        const auto traj = scheme.run(mms, opt);
                        for (const auto& r : traj.records) {
                            RowBuilder row(t.columns);
                            base(row);
                            row.set("status", "ok")
                                .set("n", r.n)
                                .set("t", r.t)
                                .set("pres_l2_interp", r.pres_l2_vs_interp)
                                .set("vel_l2_interp", r.vel_l2_vs_interp)
                                .set("pres_l2_exact", r.pres_l2_vs_exact)
                                .set("vel_l2_exact", r.vel_l2_vs_exact);
                            rows.push_back(row.done());
                        }
                    } catch (const std::exception& e) {
                        RowBuilder row(t.columns);
                        base(row);
                        row.set("status", status_text(e.what()));
                        rows.push_back(row.done());
                    }
                    for (auto& r : rows) t.rows.push_back(std::move(r));
                }
            }
        }
    }
    return t;
}

CsvTable run_transient_convergence(const ExperimentConfig& c) {
    CsvTable t;
    t.columns = {"kind",          "status",           "scheme",         "init",           "degree",
                 "N",             "h",                "rho",            "delta",          "delta2",
                 "dt",            "steps",            "final_time",     "pres_l2_time",   "vel_l2_time",
                 "vel_h1_time",   "pres_l2_final",    "vel_l2_final",   "rate_pres_l2_time", "rate_vel_l2_time",
                 "rate_vel_h1_time"};
    const ManufacturedCase mms(c.nu, c.mms);
    for (int degree : c.degrees) {
        for (double rho : c.rhos) {
            for (InitKind init : c.inits) {
                Series series{{}, std::vector<std::vector<double>>(3)};
                for (int n : c.meshes) {
                    const double h = 1.0 / n;
                    SchemeParams p = scheme_params_for(c, n, rho);
                    p.init = init;
                    note_params(t, c, p);
                    RowBuilder row(t.columns);
                    row.set("kind", "data")
                        .set("scheme", to_string(p.scheme))
                        .set("init", to_string(init))
                        .set("degree", degree)
                        .set("N", n)
                        .set("h", h)
                        .set("rho", reported_rho(c, h, p, rho))
                        .set("delta", p.delta)
                        .set("dt", p.dt)
                        .set("final_time", p.final_time);
                    if (p.scheme == SchemeKind::inc) row.set("delta2", p.effective_delta2());
                    try {
                        const auto disc = Discretization::build(build_grid(n), degree);
                        const ProjectionScheme scheme(disc, p, SolverOptions{c.tol});
                        // sqrt(sum_{n>=1} dt |e^n|^2), accumulated as the run goes.
                        double sp = 0.0, sv = 0.0, sg = 0.0;
                        ErrorRecord last;
                        RunOptions opt;
                        opt.record_every = std::numeric_limits<int>::max();
                        const auto traj = scheme.run(mms, opt, [&](const TimeState&, const ErrorRecord& r) {
                            last = r;
                            if (r.n == 0) return;
                            sp += p.dt * r.pres_l2_vs_exact * r.pres_l2_vs_exact;
                            sv += p.dt * r.vel_l2_vs_exact * r.vel_l2_vs_exact;
                            sg += p.dt * r.vel_h1_vs_exact * r.vel_h1_vs_exact;
                        });
                        const double ep = std::sqrt(sp), ev = std::sqrt(sv), eg = std::sqrt(sg);
                        row.set("status", "ok")
                            .set("steps", traj.steps_taken)
                            .set("pres_l2_time", ep)
                            .set("vel_l2_time", ev)
                            .set("vel_h1_time", eg)
                            .set("pres_l2_final", last.pres_l2_vs_exact)
                            .set("vel_l2_final", last.vel_l2_vs_exact);
                        series.hs.push_back(h);
                        series.values[0].push_back(ep);
                        series.values[1].push_back(ev);
                        series.values[2].push_back(eg);
                    } catch (const std::exception& e) {
                        row.set("status", status_text(e.what()));
                    }
                    t.rows.push_back(row.done());
                }
                const auto r = rates_of(series);
                RowBuilder row(t.columns);
                row.set("kind", "summary")
                    .set("status", series.hs.size() >= 2 ? "ok" : "single_point")
                    .set("scheme", to_string(c.scheme))
                    .set("init", to_string(init))
                    .set("degree", degree)
                    .set("rho", rho)
                    .set("rate_pres_l2_time", r[0])
                    .set("rate_vel_l2_time", r[1])
                    .set("rate_vel_h1_time", r[2]);
                t.rows.push_back(row.done());
            }
        }
    }
    return t;
}

CsvTable run_stability_probe(const ExperimentConfig& c) {
    CsvTable t;
    t.columns = {"kind", "status", "ratio",  "scheme", "degree", "N",           "h",
                 "rho",  "delta",  "dt",     "n",      "t",      "energy",      "energy_ratio",
                 "outcome"};
    const ManufacturedCase mms(c.nu, c.mms);
    for (int degree : c.degrees) {
        for (int n : c.meshes) {
            std::optional<Discretization> disc;
            std::string disc_error;
            try {
                disc.emplace(Discretization::build(build_grid(n), degree));
            } catch (const std::exception& e) {
                disc_error = e.what();
            }
            for (double rho : c.rhos) {
                for (double ratio : c.dt_ratios) {
                    const double h = 1.0 / n;
                    const SchemeParams p = scheme_params_for(c, n, rho, ratio);
                    note_params(t, c, p);
                    auto base = [&](RowBuilder& row) {
                        row.set("ratio", ratio)
                            .set("scheme", to_string(p.scheme))
                            .set("degree", degree)
                            .set("N", n)
                            .set("h", h)
                            .set("rho", reported_rho(c, h, p, rho))
                            .set("delta", p.delta)
                            .set("dt", p.dt);
                    };
                    std::vector<std::vector<std::string>> rows;
                    RowBuilder summary(t.columns);
                    base(summary);
                    summary.set("kind", "summary");
                    try {
                        if (!disc) throw std::runtime_error(disc_error);
                        const ProjectionScheme scheme(*disc, p, SolverOptions{c.tol});
                        RunOptions opt;
                        opt.energy_ceiling = c.energy_ceiling;
                        opt.record_every = c.record_every;
                        const auto traj = scheme.run(mms, opt);
                        const double e0 = traj.records.front().velocity_energy;
                        double emax = 0.0;
                        for (const auto& r : traj.records) {
                            const double rel = e0 > 0.0 ? r.velocity_energy / e0 : kNan;
                            if (!(r.velocity_energy <= emax)) emax = r.velocity_energy;
                            RowBuilder row(t.columns);
                            base(row);
                            row.set("kind", "step")
                                .set("status", "ok")
                                .set("n", r.n)
                                .set("t", r.t)
                                .set("energy", r.velocity_energy)
                                .set("energy_ratio", rel);
                            rows.push_back(row.done());
                        }
                        summary.set("status", "ok")
                            .set("n", traj.steps_taken)
                            .set("t", traj.records.back().t)
                            .set("energy", emax)
                            .set("energy_ratio", e0 > 0.0 ? emax / e0 : kNan)
                            .set("outcome", traj.diverged ? "diverged" : "stable");
                    } catch (const std::exception& e) {
                        summary.set("status", status_text(e.what())).set("outcome", "failed");
                    }
                    for (auto& r : rows) t.rows.push_back(std::move(r));
                    t.rows.push_back(summary.done());
                }
            }
        }
    }
    return t;
}

CsvTable run_experiment(const ExperimentConfig& c) {
    validate(c);
    switch (c.kind) {
        case ExperimentKind::steady_sweep: return run_steady_sweep(c);
        case ExperimentKind::transient_init: return run_transient_init(c);
        case ExperimentKind::transient_convergence: return run_transient_convergence(c);
        case ExperimentKind::stability_probe: return run_stability_probe(c);
    }
    throw std::logic_error("unknown experiment kind");
}

std::string format_csv(const ExperimentConfig& c, const CsvTable& t) {
    std::ostringstream os;
    std::istringstream cfg(to_config_text(c));
    std::string line;
    while (std::getline(cfg, line)) os << "# " << line << '\n';
    for (const auto& w : t.warnings) os << "# warning: " << w << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
    return os.str();
}

}  // namespace pstokes
