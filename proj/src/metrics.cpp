#include "pstokes/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pstokes {

namespace {

double quadratic_form(const SparseMatrix& a, std::span<const double> x) {
    if (x.size() != a.rows()) throw std::invalid_argument("norm: coefficient vector does not match the space");
    return dot(x, spmv(a, x));
}

/// Visits every degree-6 quadrature point of every element with the
/// physical basis values and gradients there.
template <class Visit>
void for_each_quadrature_point(const FeSpace& space, Visit&& visit) {
    const Mesh& mesh = space.mesh();
    const auto& rule = quadrature(kHighOrderQuadrature);
    const auto& elem = space.element();
    const int nb = elem.num_nodes();
    std::vector<double> values(nb);
    std::vector<Vec2> ref(nb), grads(nb);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto geo = ElementGeometry::of(mesh, t);
        const auto nodes = space.element_nodes(t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            elem.eval(rule.points[q], values, ref);
            for (int b = 0; b < nb; ++b) grads[b] = geo.physical_gradient(ref[b]);
            const Point x = geo.map(rule.points[q]);
            visit(nodes, x, 2.0 * geo.area * rule.weights[q], std::span<const double>(values),
                  std::span<const Vec2>(grads));
        }
    }
}

std::vector<double> vector_l2_load(const FeSpace& space, const VectorField& u) {
    std::vector<double> out(space.num_dofs(), 0.0);
    for_each_quadrature_point(space, [&](auto nodes, const Point& x, double w, auto values, auto) {
        const Vec2 f = u(x[0], x[1]);
        for (std::size_t a = 0; a < nodes.size(); ++a) {
            for (int c = 0; c < 2; ++c) out[space.dof(c, nodes[a])] += w * f[c] * values[a];
        }
    });
    return out;
}

std::vector<double> vector_h1_load(const FeSpace& space, const std::function<Grad2(double, double)>& grad) {
    std::vector<double> out(space.num_dofs(), 0.0);
    for_each_quadrature_point(space, [&](auto nodes, const Point& x, double w, auto, auto grads) {
        const Grad2 g = grad(x[0], x[1]);
        for (std::size_t a = 0; a < nodes.size(); ++a) {
            for (int c = 0; c < 2; ++c) {
                out[space.dof(c, nodes[a])] += w * (g[c][0] * grads[a][0] + g[c][1] * grads[a][1]);
            }
        }
    });
    return out;
}

std::vector<double> scalar_l2_load(const FeSpace& space, const ScalarField& u) {
    std::vector<double> out(space.num_dofs(), 0.0);
    for_each_quadrature_point(space, [&](auto nodes, const Point& x, double w, auto values, auto) {
        const double f = u(x[0], x[1]);
        for (std::size_t a = 0; a < nodes.size(); ++a) out[nodes[a]] += w * f * values[a];
    });
    return out;
}

std::vector<double> scalar_h1_load(const FeSpace& space, const VectorField& grad) {
    std::vector<double> out(space.num_dofs(), 0.0);
    for_each_quadrature_point(space, [&](auto nodes, const Point& x, double w, auto, auto grads) {
        const Vec2 g = grad(x[0], x[1]);
        for (std::size_t a = 0; a < nodes.size(); ++a) out[nodes[a]] += w * (g[0] * grads[a][0] + g[1] * grads[a][1]);
    });
    return out;
}

std::vector<double> cross_term(const SparseMatrix& a, std::span<const double> interp, std::span<const double> load) {
    std::vector<double> out = spmv(a, interp);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= load[i];
    return out;
}

}  // namespace

NormEvaluator::NormEvaluator(const FeSpace& space)
    : mass_(assemble_mass(space, Dofs::all)), stiffness_(assemble_stiffness(space, Dofs::all)) {}

NormEvaluator::NormEvaluator(SparseMatrix mass, SparseMatrix stiffness)
    : mass_(std::move(mass)), stiffness_(std::move(stiffness)) {}

double NormEvaluator::norm(std::span<const double> a, Norm which) const {
    const double q = quadratic_form(which == Norm::L2 ? mass_ : stiffness_, a);
    return std::sqrt(std::max(q, 0.0));
}

double NormEvaluator::diff(std::span<const double> a, std::span<const double> b, Norm which) const {
    if (a.size() != b.size()) throw std::invalid_argument("fe_norm_diff: coefficient vectors differ in size");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
    return norm(d, which);
}

double fe_norm_diff(const FeSpace& space, std::span<const double> a, std::span<const double> b, Norm which) {
    if (a.size() != space.num_dofs() || b.size() != space.num_dofs()) {
        throw std::invalid_argument("fe_norm_diff: coefficient vectors do not belong to the space");
    }
    return NormEvaluator(space).diff(a, b, which);
}

double error_vs_exact(const FeSpace& space, std::span<const double> coeffs, const ScalarExact& exact, Norm which) {
    if (space.components() != 1 || coeffs.size() != space.num_dofs()) {
        throw std::invalid_argument("error_vs_exact: expected scalar-space coefficients");
    }
    double sum = 0.0;
    for_each_quadrature_point(space, [&](auto nodes, const Point& x, double w, auto values, auto grads) {
        if (which == Norm::L2) {
            double uh = 0.0;
            for (std::size_t a = 0; a < nodes.size(); ++a) uh += coeffs[nodes[a]] * values[a];
            const double e = uh - exact.value(x[0], x[1]);
            sum += w * e * e;
        } else {
            Vec2 g{0.0, 0.0};
            for (std::size_t a = 0; a < nodes.size(); ++a) {
                g[0] += coeffs[nodes[a]] * grads[a][0];
                g[1] += coeffs[nodes[a]] * grads[a][1];
            }
            const Vec2 ge = exact.gradient(x[0], x[1]);
            sum += w * ((g[0] - ge[0]) * (g[0] - ge[0]) + (g[1] - ge[1]) * (g[1] - ge[1]));
        }
    });
    return std::sqrt(sum);
}

double error_vs_exact(const FeSpace& space, std::span<const double> coeffs, const VectorExact& exact, Norm which) {
    if (space.components() != 2 || coeffs.size() != space.num_dofs()) {
        throw std::invalid_argument("error_vs_exact: expected velocity-space coefficients");
    }
    double sum = 0.0;
    for_each_quadrature_point(space, [&](auto nodes, const Point& x, double w, auto values, auto grads) {
        if (which == Norm::L2) {
            Vec2 uh{0.0, 0.0};
            for (std::size_t a = 0; a < nodes.size(); ++a) {
                for (int c = 0; c < 2; ++c) uh[c] += coeffs[space.dof(c, nodes[a])] * values[a];
            }
            const Vec2 u = exact.value(x[0], x[1]);
            sum += w * ((uh[0] - u[0]) * (uh[0] - u[0]) + (uh[1] - u[1]) * (uh[1] - u[1]));
        } else {
            Grad2 g{};
            for (std::size_t a = 0; a < nodes.size(); ++a) {
                for (int c = 0; c < 2; ++c) {
                    const double v = coeffs[space.dof(c, nodes[a])];
                    g[c][0] += v * grads[a][0];
                    g[c][1] += v * grads[a][1];
                }
            }
            const Grad2 ge = exact.gradient(x[0], x[1]);
            for (int c = 0; c < 2; ++c) {
                for (int d = 0; d < 2; ++d) sum += w * (g[c][d] - ge[c][d]) * (g[c][d] - ge[c][d]);
            }
        }
    });
    return std::sqrt(sum);
}

double discrete_time_norm(std::span<const double> values, double dt) {
    if (values.empty()) throw std::invalid_argument("discrete_time_norm: empty input");
    double s = 0.0;
    for (double v : values) s += dt * v * v;
    return std::sqrt(s);
}

double discrete_time_norm(std::span<const ErrorRecord> records, double dt, double ErrorRecord::*component) {
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back(r.*component);
    return discrete_time_norm(values, dt);
}

double observed_rate(std::span<const double> errors, std::span<const double> hs) {
    if (errors.size() != hs.size() || errors.size() < 2) {
        throw std::invalid_argument("observed_rate: need at least two (h, error) pairs");
    }
    const std::size_t n = errors.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(errors[i] > 0.0) || !(hs[i] > 0.0)) {
            throw std::invalid_argument("observed_rate: errors and mesh sizes must be positive");
        }
        mx += std::log(hs[i]);
        my += std::log(errors[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(hs[i]) - mx;
        sxy += dx * (std::log(errors[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw std::invalid_argument("observed_rate: mesh sizes must not all be equal");
    return sxy / sxx;
}

std::vector<double> pairwise_rates(std::span<const double> errors, std::span<const double> hs) {
    std::vector<double> out;
    for (std::size_t i = 1; i < errors.size(); ++i) {
        out.push_back(observed_rate(errors.subspan(i - 1, 2), hs.subspan(i - 1, 2)));
    }
    return out;
}

TransientErrorTracker::TransientErrorTracker(const Discretization& disc, const ManufacturedCase& mms)
    : disc_(&disc),
      pressure_stiffness_full_(disc.ops.pressure_stiffness),
      gradient_transpose_(disc.ops.gradient.transpose()) {
    const FeSpace& vs = disc.velocity;
    const FeSpace& ps = disc.pressure;
    const VectorExact vex{mms.s_field(), [mms](double x, double y) { return mms.grad_s(x, y); }};
    const ScalarExact pex{mms.z_field(), [mms](double x, double y) { return mms.grad_z(x, y); }};

    vel_interp_ = interpolate(vs, vex.value);
    pres_interp_ = interpolate(ps, pex.value);

    vel_l2_cross_ = cross_term(disc.velocity_mass_full, vel_interp_, vector_l2_load(vs, vex.value));
    vel_h1_cross_ = cross_term(disc.velocity_stiffness_full, vel_interp_, vector_h1_load(vs, vex.gradient));
    pres_l2_cross_ = cross_term(disc.pressure_mass_full, pres_interp_, scalar_l2_load(ps, pex.value));
    pres_h1_cross_ = cross_term(pressure_stiffness_full_, pres_interp_, scalar_h1_load(ps, pex.gradient));

    auto sq = [](double x) { return x * x; };
    vel_l2_interp_err2_ = sq(error_vs_exact(vs, vel_interp_, vex, Norm::L2));
    vel_h1_interp_err2_ = sq(error_vs_exact(vs, vel_interp_, vex, Norm::H1semi));
    pres_l2_interp_err2_ = sq(error_vs_exact(ps, pres_interp_, pex, Norm::L2));
    pres_h1_interp_err2_ = sq(error_vs_exact(ps, pres_interp_, pex, Norm::H1semi));
}

ErrorRecord TransientErrorTracker::evaluate(int n, double t, std::span<const double> velocity,
                                            std::span<const double> pressure) const {
    const Discretization& d = *disc_;
    if (velocity.size() != d.velocity.num_dofs() || pressure.size() != d.pressure.num_dofs()) {
        throw std::invalid_argument("TransientErrorTracker: coefficient vectors do not match the spaces");
    }
    const double c = ManufacturedCase::time_factor(t);
    std::vector<double> ev(velocity.size()), ep(pressure.size());
    for (std::size_t i = 0; i < ev.size(); ++i) ev[i] = velocity[i] - c * vel_interp_[i];
    for (std::size_t i = 0; i < ep.size(); ++i) ep[i] = pressure[i] - c * pres_interp_[i];

    auto expand = [c](double e2, double cross, double interp2) {
        return std::sqrt(std::max(e2 + 2.0 * c * cross + c * c * interp2, 0.0));
    };

    ErrorRecord r;
    r.n = n;
    r.t = t;
    const double ev_l2 = quadratic_form(d.velocity_mass_full, ev);
    const double ev_h1 = quadratic_form(d.velocity_stiffness_full, ev);
    const double ep_l2 = quadratic_form(d.pressure_mass_full, ep);
    const double ep_h1 = quadratic_form(pressure_stiffness_full_, ep);
    r.vel_l2_vs_interp = std::sqrt(std::max(ev_l2, 0.0));
    r.pres_l2_vs_interp = std::sqrt(std::max(ep_l2, 0.0));
    r.vel_l2_vs_exact = expand(ev_l2, dot(ev, vel_l2_cross_), vel_l2_interp_err2_);
    r.vel_h1_vs_exact = expand(ev_h1, dot(ev, vel_h1_cross_), vel_h1_interp_err2_);
    r.pres_l2_vs_exact = expand(ep_l2, dot(ep, pres_l2_cross_), pres_l2_interp_err2_);
    r.pres_h1semi_vs_exact = expand(ep_h1, dot(ep, pres_h1_cross_), pres_h1_interp_err2_);
    r.velocity_energy = quadratic_form(d.velocity_mass_full, velocity);
    r.divergence = norm2(spmv(gradient_transpose_, d.velocity.restrict_to_free(velocity)));
    return r;
}

}  // namespace pstokes
