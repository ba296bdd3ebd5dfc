#include "pstokes/sparse.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>

namespace pstokes {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<int> row_ptr, std::vector<int> col_idx,
                           std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
    if (row_ptr_.size() != rows_ + 1 || col_idx_.size() != values_.size() ||
        static_cast<std::size_t>(row_ptr_.back()) != values_.size()) {
        throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] < 0 || static_cast<std::size_t>(col_idx_[k]) >= cols_ ||
                (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])) {
                throw std::invalid_argument("SparseMatrix: column indices must be sorted, unique and in range");
            }
        }
    }
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<int> rp(n + 1), ci(n);
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(ci.begin(), ci.end(), 0);
    return SparseMatrix(n, n, std::move(rp), std::move(ci), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::zero(std::size_t rows, std::size_t cols) {
    return SparseMatrix(rows, cols, std::vector<int>(rows + 1, 0), {}, {});
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col_idx_.begin() + row_ptr_[i];
    const auto last = col_idx_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(first, last, static_cast<int>(j));
    return (it != last && *it == static_cast<int>(j)) ? values_[it - col_idx_.begin()] : 0.0;
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<int> rp(cols_ + 1, 0);
    for (int c : col_idx_) ++rp[c + 1];
    std::partial_sum(rp.begin(), rp.end(), rp.begin());
    std::vector<int> ci(nnz());
    std::vector<double> v(nnz());
    std::vector<int> next(rp.begin(), rp.end() - 1);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const int pos = next[col_idx_[k]]++;
            ci[pos] = static_cast<int>(i);
            v[pos] = values_[k];
        }
    }
    return SparseMatrix(cols_, rows_, std::move(rp), std::move(ci), std::move(v));
}

SparseMatrix SparseMatrix::select(std::span<const int> rows, std::span<const int> cols) const {
    std::vector<int> col_map(cols_, -1);
    for (std::size_t k = 0; k < cols.size(); ++k) col_map[cols[k]] = static_cast<int>(k);
    std::vector<int> rp{0};
    std::vector<int> ci;
    std::vector<double> v;
    for (int r : rows) {
        // Selected columns are not necessarily in ascending order; sort per row.
        std::vector<std::pair<int, double>> row;
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const int c = col_map[col_idx_[k]];
            if (c >= 0) row.emplace_back(c, values_[k]);
        }
        std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [c, x] : row) {
            ci.push_back(c);
            v.push_back(x);
        }
        rp.push_back(static_cast<int>(ci.size()));
    }
    return SparseMatrix(rows.size(), cols.size(), std::move(rp), std::move(ci), std::move(v));
}

std::vector<double> SparseMatrix::to_dense() const {
    std::vector<double> d(rows_ * cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d[i * cols_ + col_idx_[k]] = values_[k];
    }
    return d;
}

SparseMatrix TripletBuilder::build() const {
    // Counting sort by row keeps insertion order; stable sort by column then
    // sums duplicates in that order.
    std::vector<int> count(rows_ + 1, 0);
    for (const auto& e : entries_) {
        if (e.i < 0 || static_cast<std::size_t>(e.i) >= rows_ || e.j < 0 || static_cast<std::size_t>(e.j) >= cols_) {
            throw std::out_of_range("TripletBuilder: index out of range");
        }
        ++count[e.i + 1];
    }
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<int> order(entries_.size());
    {
        std::vector<int> next(count.begin(), count.end() - 1);
        for (std::size_t k = 0; k < entries_.size(); ++k) order[next[entries_[k].i]++] = static_cast<int>(k);
    }
    std::vector<int> rp{0};
    std::vector<int> ci;
    std::vector<double> v;
    ci.reserve(entries_.size());
    v.reserve(entries_.size());
    for (std::size_t r = 0; r < rows_; ++r) {
        auto first = order.begin() + count[r];
        auto last = order.begin() + count[r + 1];
        std::stable_sort(first, last, [this](int a, int b) { return entries_[a].j < entries_[b].j; });
        for (auto it = first; it != last; ++it) {
            const auto& e = entries_[*it];
            if (!ci.empty() && static_cast<int>(ci.size()) > rp.back() && ci.back() == e.j) {
                v.back() += e.v;
            } else {
                ci.push_back(e.j);
                v.push_back(e.v);
            }
        }
        rp.push_back(static_cast<int>(ci.size()));
    }
    return SparseMatrix(rows_, cols_, std::move(rp), std::move(ci), std::move(v));
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.cols() || y.size() != a.rows()) {
        throw std::invalid_argument("spmv: dimension mismatch (" + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " times " + std::to_string(x.size()) + ")");
    }
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    const auto& v = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
        y[i] = s;
    }
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x) {
    std::vector<double> y(a.rows());
    spmv(a, x, y);
    return y;
}

SparseMatrix add(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: dimension mismatch");
    std::vector<int> rp{0};
    std::vector<int> ci;
    std::vector<double> v;
    ci.reserve(a.nnz() + b.nnz());
    v.reserve(a.nnz() + b.nnz());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        int ka = a.row_ptr()[i], kb = b.row_ptr()[i];
        const int ea = a.row_ptr()[i + 1], eb = b.row_ptr()[i + 1];
        while (ka < ea || kb < eb) {
            const int ca = ka < ea ? a.col_idx()[ka] : std::numeric_limits<int>::max();
            const int cb = kb < eb ? b.col_idx()[kb] : std::numeric_limits<int>::max();
            if (ca == cb) {
                ci.push_back(ca);
                v.push_back(alpha * a.values()[ka++] + beta * b.values()[kb++]);
            } else if (ca < cb) {
                ci.push_back(ca);
                v.push_back(alpha * a.values()[ka++]);
            } else {
                ci.push_back(cb);
                v.push_back(beta * b.values()[kb++]);
            }
        }
        rp.push_back(static_cast<int>(ci.size()));
    }
    return SparseMatrix(a.rows(), a.cols(), std::move(rp), std::move(ci), std::move(v));
}

SparseMatrix scaled(double alpha, const SparseMatrix& a) {
    std::vector<double> v = a.values();
    for (double& x : v) x *= alpha;
    return SparseMatrix(a.rows(), a.cols(), a.row_ptr(), a.col_idx(), std::move(v));
}

double symmetry_defect(const SparseMatrix& a) {
    const SparseMatrix t = a.transpose();
    const SparseMatrix d = add(1.0, a, -1.0, t);
    double m = 0.0;
    for (double x : d.values()) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void remove_mean(std::span<double> x, std::span<const double> weights) {
    if (x.empty()) return;
    double num = 0.0, den = 0.0;
    if (weights.empty()) {
        num = std::accumulate(x.begin(), x.end(), 0.0);
        den = static_cast<double>(x.size());
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) {
            num += weights[i] * x[i];
            den += weights[i];
        }
    }
    const double m = num / den;
    for (double& v : x) v -= m;
}

CgResult cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& opt,
                  std::span<const double> x0) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n || (!x0.empty() && x0.size() != n)) {
        throw std::invalid_argument("cg_solve: dimension mismatch");
    }
    const double bnorm = norm2(b);
    CgResult out;
    out.x.assign(n, 0.0);
    if (bnorm == 0.0) {
        out.report.converged = true;
        return out;
    }
    if (opt.project_out_constants) {
        const double s = std::accumulate(b.begin(), b.end(), 0.0);
        if (std::abs(s) / std::sqrt(static_cast<double>(n)) > 1e-10 * bnorm) {
            throw std::invalid_argument("cg_solve: right-hand side is not orthogonal to constants");
        }
    }
    auto project = [&](std::span<double> v) {
        if (opt.project_out_constants) remove_mean(v);
    };

    std::vector<double> inv_diag(n, 1.0);
    if (opt.jacobi) {
        const auto d = a.diagonal();
        for (std::size_t i = 0; i < n; ++i) inv_diag[i] = d[i] > 0.0 ? 1.0 / d[i] : 1.0;
    }

    std::vector<double>& x = out.x;
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), x.begin());
    project(x);

    std::vector<double> r(n), z(n), p(n), ap(n);
    int iterations = 0;
    double true_rel = 0.0;
    // Recurrence residuals drift; restart from the true residual a few times.
    for (int restart = 0; restart < 4; ++restart) {
        spmv(a, x, ap);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
        project(r);
        double rnorm = norm2(r);
        if (rnorm <= opt.tol * bnorm) {
            true_rel = rnorm / bnorm;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        project(z);
        p = z;
        double rz = dot(r, z);
        while (iterations < opt.max_iterations) {
            spmv(a, p, ap);
            const double pap = dot(p, ap);
            if (!(pap > 0.0)) break;
            const double alpha = rz / pap;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            project(r);
            ++iterations;
            rnorm = norm2(r);
            if (rnorm <= opt.tol * bnorm) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            project(z);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        project(x);
        spmv(a, x, ap);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
        project(r);
        true_rel = norm2(r) / bnorm;
        if (true_rel <= opt.tol || iterations >= opt.max_iterations) break;
    }
    out.report.iterations = iterations;
    out.report.relative_residual = true_rel;
    out.report.converged = true_rel <= opt.tol;
    if (!out.report.converged) {
        throw SolveError("cg_solve: no convergence after " + std::to_string(iterations) +
                             " iterations (relative residual " + std::to_string(true_rel) + ")",
                         out.report);
    }
    return out;
}

struct DirectSolver::Impl {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
};

DirectSolver::DirectSolver(const SparseMatrix& a, int pinned)
    : impl_(std::make_unique<Impl>()), n_(a.rows()), pinned_(pinned) {
    if (a.rows() != a.cols()) throw std::invalid_argument("DirectSolver: matrix must be square");
    if (pinned >= static_cast<int>(n_)) throw std::invalid_argument("DirectSolver: pinned index out of range");
    const int m = static_cast<int>(n_) - (pinned >= 0 ? 1 : 0);
    auto reduced = [pinned](int i) { return (pinned >= 0 && i > pinned) ? i - 1 : i; };
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(a.nnz());
    for (std::size_t i = 0; i < n_; ++i) {
        if (static_cast<int>(i) == pinned) continue;
        for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            const int j = a.col_idx()[k];
            if (j == pinned || j > static_cast<int>(i)) continue;
            trips.emplace_back(reduced(static_cast<int>(i)), reduced(j), a.values()[k]);
        }
    }
    Eigen::SparseMatrix<double> e(m, m);
    e.setFromTriplets(trips.begin(), trips.end());
    impl_->ldlt.compute(e);
    if (impl_->ldlt.info() != Eigen::Success) {
        throw SolveError("DirectSolver: LDL^T factorization failed", SolveReport{});
    }
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

std::vector<double> DirectSolver::solve(std::span<const double> b) const {
    if (b.size() != n_) throw std::invalid_argument("DirectSolver::solve: dimension mismatch");
    const int m = static_cast<int>(n_) - (pinned_ >= 0 ? 1 : 0);
    Eigen::VectorXd rhs(m);
    for (int i = 0, k = 0; i < static_cast<int>(n_); ++i) {
        if (i != pinned_) rhs[k++] = b[i];
    }
    const Eigen::VectorXd y = impl_->ldlt.solve(rhs);
    std::vector<double> x(n_, 0.0);
    for (int i = 0, k = 0; i < static_cast<int>(n_); ++i) {
        if (i != pinned_) x[i] = y[k++];
    }
    return x;
}

namespace {

SparseMatrix saddle_block(const SparseMatrix& k, const SparseMatrix& g, const SparseMatrix& s, double delta) {
    const std::size_t nv = k.rows();
    const std::size_t np = s.rows();
    const SparseMatrix gt = g.transpose();
    TripletBuilder tb(nv + np, nv + np);
    tb.reserve(k.nnz() + 2 * g.nnz() + s.nnz());
    for (std::size_t i = 0; i < nv; ++i) {
        for (int p = k.row_ptr()[i]; p < k.row_ptr()[i + 1]; ++p) tb.add(i, k.col_idx()[p], k.values()[p]);
        for (int p = g.row_ptr()[i]; p < g.row_ptr()[i + 1]; ++p) tb.add(i, nv + g.col_idx()[p], g.values()[p]);
    }
    for (std::size_t i = 0; i < np; ++i) {
        for (int p = gt.row_ptr()[i]; p < gt.row_ptr()[i + 1]; ++p) tb.add(nv + i, gt.col_idx()[p], gt.values()[p]);
        for (int p = s.row_ptr()[i]; p < s.row_ptr()[i + 1]; ++p) {
            tb.add(nv + i, nv + s.col_idx()[p], -delta * s.values()[p]);
        }
    }
    return tb.build();
}

}  // namespace

SaddleResult saddle_solve(const SparseMatrix& k, const SparseMatrix& g, const SparseMatrix& s, double delta,
                          std::span<const double> rhs, double tol, std::span<const double> mean_weights) {
    if (!(delta > 0.0)) {
        throw std::invalid_argument("saddle_solve: delta must be > 0; without stabilization the pressure block "
                                    "is singular for equal-order elements");
    }
    const std::size_t nv = k.rows();
    const std::size_t np = s.rows();
    if (k.cols() != nv || g.rows() != nv || g.cols() != np || s.cols() != np || rhs.size() != nv ||
        (!mean_weights.empty() && mean_weights.size() != np)) {
        throw std::invalid_argument("saddle_solve: dimension mismatch");
    }
    SaddleResult out;
    out.velocity.assign(nv, 0.0);
    out.pressure.assign(np, 0.0);
    const double rnorm = norm2(rhs);
    if (rnorm == 0.0) {
        out.report.converged = true;
        return out;
    }

    const SparseMatrix block = saddle_block(k, g, s, delta);
    const DirectSolver solver(block, static_cast<int>(nv));
    std::vector<double> b(nv + np, 0.0);
    std::copy(rhs.begin(), rhs.end(), b.begin());

    std::vector<double> x = solver.solve(b);
    std::vector<double> r(nv + np);
    int refinements = 0;
    for (; refinements < 3; ++refinements) {
        spmv(block, x, r);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
        if (norm2(r) <= 1e-3 * tol * rnorm) break;
        const auto dx = solver.solve(r);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
    }
    std::copy(x.begin(), x.begin() + nv, out.velocity.begin());
    std::copy(x.begin() + nv, x.end(), out.pressure.begin());
    remove_mean(out.pressure, mean_weights);

    // Residuals of the two block rows after the mean shift.
    const auto kv = spmv(k, out.velocity);
    const auto gz = spmv(g, out.pressure);
    std::vector<double> mom(nv);
    for (std::size_t i = 0; i < nv; ++i) mom[i] = kv[i] + gz[i] - rhs[i];
    const auto gts = spmv(g.transpose(), out.velocity);
    const auto sz = spmv(s, out.pressure);
    std::vector<double> con(np);
    for (std::size_t i = 0; i < np; ++i) con[i] = gts[i] - delta * sz[i];
    out.momentum_residual = norm2(mom) / rnorm;
    out.continuity_residual = norm2(con) / rnorm;
    out.report.iterations = refinements;
    out.report.relative_residual = std::max(out.momentum_residual, out.continuity_residual);
    out.report.converged = out.report.relative_residual <= tol;
    if (!out.report.converged) {
        throw SolveError("saddle_solve: residual " + std::to_string(out.report.relative_residual) +
                             " above tolerance",
                         out.report);
    }
    return out;
}

}  // namespace pstokes
