#include <algorithm>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pstokes/experiments.hpp"
#include "pstokes/steady.hpp"

namespace py = pybind11;
using namespace pstokes;

namespace {

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
    py::array_t<T> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

// (data, indices, indptr, shape): the argument tuple of scipy.sparse.csr_matrix.
py::tuple csr_tuple(const SparseMatrix& a) {
    return py::make_tuple(to_array(a.values()), to_array(a.col_idx()), to_array(a.row_ptr()),
                          py::make_tuple(a.rows(), a.cols()));
}

py::dict record_dict(const ErrorRecord& r) {
    py::dict d;
    d["n"] = r.n;
    d["t"] = r.t;
    d["vel_l2_interp"] = r.vel_l2_vs_interp;
    d["vel_l2_exact"] = r.vel_l2_vs_exact;
    d["vel_h1_exact"] = r.vel_h1_vs_exact;
    d["pres_l2_interp"] = r.pres_l2_vs_interp;
    d["pres_l2_exact"] = r.pres_l2_vs_exact;
    d["pres_h1_exact"] = r.pres_h1semi_vs_exact;
    d["energy"] = r.velocity_energy;
    d["divergence"] = r.divergence;
    return d;
}

py::tuple grid(int n) {
    const auto mesh = build_grid(n);
    py::array_t<double> xy({static_cast<py::ssize_t>(mesh->num_vertices()), py::ssize_t{2}});
    auto p = xy.mutable_unchecked<2>();
    for (std::size_t i = 0; i < mesh->num_vertices(); ++i) {
        p(i, 0) = mesh->vertices()[i][0];
        p(i, 1) = mesh->vertices()[i][1];
    }
    py::array_t<int> tri({static_cast<py::ssize_t>(mesh->num_triangles()), py::ssize_t{3}});
    auto t = tri.mutable_unchecked<2>();
    for (std::size_t k = 0; k < mesh->num_triangles(); ++k) {
        for (int j = 0; j < 3; ++j) t(k, j) = mesh->triangles()[k][j];
    }
    return py::make_tuple(xy, tri);
}

py::dict system_matrices(int n, int degree) {
    const auto disc = Discretization::build(build_grid(n), degree);
    py::dict d;
    d["mass"] = csr_tuple(disc.ops.mass);
    d["stiffness"] = csr_tuple(disc.ops.stiffness);
    d["gradient"] = csr_tuple(disc.ops.gradient);
    d["pressure_stiffness"] = csr_tuple(disc.ops.pressure_stiffness);
    d["pressure_weights"] = to_array(disc.pressure_weights);
    return d;
}

py::dict steady(int n, int degree, double nu, double rho, double tol) {
    const auto disc = Discretization::build(build_grid(n), degree);
    const ManufacturedCase mms(nu);
    const double delta = choose_delta(1.0 / n, nu, rho);
    const VectorField g = [&mms](double x, double y) { return mms.steady_forcing(x, y); };
    const auto sol = solve_stabilized_stokes(disc, nu, delta, g, tol);
    const auto e = steady_errors(disc, sol, mms);
    py::dict d;
    d["delta"] = delta;
    d["velocity"] = to_array(sol.velocity);
    d["pressure"] = to_array(sol.pressure);
    d["vel_l2_interp"] = e.vel_l2_interp;
    d["pres_l2_interp"] = e.pres_l2_interp;
    d["vel_l2_exact"] = e.vel_l2_exact;
    d["pres_l2_exact"] = e.pres_l2_exact;
    d["vel_h1_exact"] = e.vel_h1_exact;
    d["pres_h1_exact"] = e.pres_h1_exact;
    return d;
}

py::list transient(int n, int degree, double nu, double rho, double dt_ratio, double final_time,
                   const std::string& scheme, const std::string& init, const std::string& guard) {
    const auto disc = Discretization::build(build_grid(n), degree);
    SchemeParams p;
    p.nu = nu;
    p.delta = choose_delta(1.0 / n, nu, rho);
    p.dt = dt_ratio * p.delta;
    p.final_time = final_time;
    p.scheme = parse_scheme_kind(scheme);
    p.init = parse_init_kind(init);
    p.guard = guard == "standard" ? StepGuard::standard
              : guard == "relaxed" ? StepGuard::relaxed
              : guard == "unstable" ? StepGuard::unstable
                                    : throw std::invalid_argument("unknown guard '" + guard + "'");
    Trajectory traj;
    {
        py::gil_scoped_release nogil;
        traj = ProjectionScheme(disc, p).run(ManufacturedCase(nu));
    }
    py::list out;
    for (const auto& r : traj.records) out.append(record_dict(r));
    return out;
}

std::string run_config(const std::string& text, const std::string& kind) {
    ConfigOverrides ov;
    if (!kind.empty()) ov.kind = parse_experiment_kind(kind);
    const auto cfg = parse_config_text(text, ov);
    CsvTable table;
    {
        py::gil_scoped_release nogil;
        table = run_experiment(cfg);
    }
    return format_csv(cfg, table);
}

}  // namespace

PYBIND11_MODULE(_pstokes, m) {
    m.doc() = "Stabilized projection schemes for transient Stokes with equal-order elements";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("build_grid", &grid, py::arg("n"), "Vertices (nv, 2) and triangles (nt, 3) of the n x n SW-NE mesh");
    m.def("choose_delta", &choose_delta, py::arg("h"), py::arg("nu"), py::arg("rho"));
    m.def("rho_of", &rho_of, py::arg("h"), py::arg("nu"), py::arg("delta"));
    m.def("system_matrices", &system_matrices, py::arg("n"), py::arg("degree"),
          "M, A, G, S in CSR form (data, indices, indptr, shape) plus the pressure mean weights");
    m.def("steady_solve", &steady, py::arg("n"), py::arg("degree") = 1, py::arg("nu") = 0.01,
          py::arg("rho") = 100.0, py::arg("tol") = 1e-10,
          "Stabilized steady Stokes for the manufactured case; returns coefficients and errors");
    m.def("run_scheme", &transient, py::arg("n"), py::arg("degree") = 1, py::arg("nu") = 0.01,
          py::arg("rho") = 10.0, py::arg("dt_ratio") = 1.0, py::arg("final_time") = 0.1,
          py::arg("scheme") = "noninc", py::arg("init") = "stabilized_stokes", py::arg("guard") = "standard",
          "Runs a projection scheme on the manufactured case; one dict of errors per step");
    m.def("default_config", [](const std::string& kind) {
        return to_config_text(ExperimentConfig::defaults(parse_experiment_kind(kind)));
    }, py::arg("kind") = "steady_sweep");
    m.def("normalize_config", [](const std::string& text, const std::string& kind) {
        ConfigOverrides ov;
        if (!kind.empty()) ov.kind = parse_experiment_kind(kind);
        return to_config_text(parse_config_text(text, ov));
    }, py::arg("text"), py::arg("kind") = "", "Parses and re-serializes a config (raises ConfigError)");
    m.def("run_experiment", &run_config, py::arg("text"), py::arg("kind") = "",
          "Runs the experiment described by a config text and returns the CSV");
}
