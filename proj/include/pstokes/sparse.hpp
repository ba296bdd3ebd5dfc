#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pstokes {

/// Compressed-row sparse matrix. Column indices are sorted and unique
/// within each row.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<int> row_ptr, std::vector<int> col_idx,
                 std::vector<double> values);

    static SparseMatrix identity(std::size_t n);
    static SparseMatrix zero(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }
    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

    /// Entry (i, j), zero when not stored.
    double at(std::size_t i, std::size_t j) const;
    std::vector<double> diagonal() const;
    SparseMatrix transpose() const;
    /// Sub-matrix with rows[k] -> k and cols[k] -> k.
    SparseMatrix select(std::span<const int> rows, std::span<const int> cols) const;
    /// Row-major dense copy, for small test problems.
    std::vector<double> to_dense() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

/// Accumulates (i, j, v) triplets. Duplicates are summed in insertion order.
class TripletBuilder {
public:
    TripletBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}
    void reserve(std::size_t n) { entries_.reserve(n); }
    void add(int i, int j, double v) { entries_.push_back({i, j, v}); }
    SparseMatrix build() const;

private:
    struct Entry {
        int i, j;
        double v;
    };
    std::size_t rows_, cols_;
    std::vector<Entry> entries_;
};

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x);
/// y = A x into preallocated storage.
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
/// alpha * A + beta * B.
SparseMatrix add(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b);
SparseMatrix scaled(double alpha, const SparseMatrix& a);
/// Largest absolute entry of A - A^T.
double symmetry_defect(const SparseMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Thrown when an iterative or direct solve does not meet its tolerance.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, SolveReport report) : std::runtime_error(what), report_(report) {}
    const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

struct CgOptions {
    double tol = 1e-10;
    int max_iterations = 10000;
    /// Work in the complement of the constant vector (singular Neumann-type A).
    bool project_out_constants = false;
    bool jacobi = true;
};

struct CgResult {
    std::vector<double> x;
    SolveReport report;
};

/// Preconditioned conjugate gradients. x0 (optional) is the starting guess.
/// With project_out_constants the right-hand side must be orthogonal to
/// constants within 1e-10 * |b|, and the returned x has zero arithmetic mean.
CgResult cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& options = {},
                  std::span<const double> x0 = {});

/// Sparse LDL^T factorization of a symmetric matrix with an optional pinned
/// (removed) index, for SPD, quasi-definite, or singular matrices whose
/// kernel is spanned by a vector with a nonzero entry at the pinned index.
class DirectSolver {
public:
    explicit DirectSolver(const SparseMatrix& a, int pinned = -1);
    ~DirectSolver();
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    std::size_t size() const { return n_; }
    /// Solution with x[pinned] = 0.
    std::vector<double> solve(std::span<const double> b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t n_ = 0;
    int pinned_ = -1;
};

struct SaddleResult {
    std::vector<double> velocity;
    std::vector<double> pressure;
    SolveReport report;
    double momentum_residual = 0.0;
    double continuity_residual = 0.0;
};

/// Solves [K, G; G^T, -delta S] [s; z] = [rhs; 0] on the zero-mean pressure
/// subspace. K is the (already nu-scaled) velocity operator on free DOFs.
/// mean_weights defines the pressure mean (integral weights); empty means
/// arithmetic mean. Residual norms are reported relative to |rhs|.
SaddleResult saddle_solve(const SparseMatrix& k, const SparseMatrix& g, const SparseMatrix& s, double delta,
                          std::span<const double> rhs, double tol = 1e-10,
                          std::span<const double> mean_weights = {});

/// Shift x by a constant so that sum(w_i x_i) = 0 (arithmetic mean if w empty).
void remove_mean(std::span<double> x, std::span<const double> weights = {});

}  // namespace pstokes
