#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "core_elements/errors.hpp"

namespace core_elements {

using index_t = std::int64_t;
using Vector = std::vector<double>;

/// Dense column-major matrix. The predictor matrix of a regression problem,
/// and also the container for small p-by-p work matrices (Grams, projectors).
/// `centered` records whether every column has been mean-centered.
class DesignMatrix {
public:
    DesignMatrix() = default;
    DesignMatrix(index_t n, index_t p);  // zero-filled
    DesignMatrix(index_t n, index_t p, Vector values, bool centered = false);

    static DesignMatrix identity(index_t p);

    index_t rows() const { return n_; }
    index_t cols() const { return p_; }

    double operator()(index_t i, index_t j) const { return values_[static_cast<std::size_t>(j * n_ + i)]; }
    double& operator()(index_t i, index_t j) { return values_[static_cast<std::size_t>(j * n_ + i)]; }

    std::span<const double> column(index_t j) const {
        return {values_.data() + j * n_, static_cast<std::size_t>(n_)};
    }
    std::span<double> column(index_t j) {
        return {values_.data() + j * n_, static_cast<std::size_t>(n_)};
    }

    const Vector& values() const { return values_; }

    bool centered() const { return centered_; }
    void set_centered(bool value) { centered_ = value; }

    /// Subtract each column's mean and set the centered flag.
    void center_columns();

    /// Copy of the listed rows, in the given order (duplicates allowed).
    DesignMatrix submatrix_rows(std::span<const index_t> rows) const;

private:
    index_t n_ = 0;
    index_t p_ = 0;
    Vector values_;
    bool centered_ = false;
};

/// Compressed sparse column storage for the sketch X*. Row indices are
/// strictly increasing within a column and stored values are nonzero.
class SparseColumnMatrix {
public:
    SparseColumnMatrix() = default;
    SparseColumnMatrix(index_t n, index_t p);  // all columns empty

    /// entries[j] holds the (row, value) pairs of column j.
    SparseColumnMatrix(index_t n, index_t p,
                       const std::vector<std::vector<std::pair<index_t, double>>>& entries);

    index_t rows() const { return n_; }
    index_t cols() const { return p_; }
    index_t nnz() const { return static_cast<index_t>(vals_.size()); }
    index_t column_nnz(index_t j) const { return col_ptr_[static_cast<std::size_t>(j + 1)] - col_ptr_[static_cast<std::size_t>(j)]; }

    std::span<const index_t> column_rows(index_t j) const {
        const auto b = static_cast<std::size_t>(col_ptr_[static_cast<std::size_t>(j)]);
        return {row_idx_.data() + b, static_cast<std::size_t>(column_nnz(j))};
    }
    std::span<const double> column_values(index_t j) const {
        const auto b = static_cast<std::size_t>(col_ptr_[static_cast<std::size_t>(j)]);
        return {vals_.data() + b, static_cast<std::size_t>(column_nnz(j))};
    }

    DesignMatrix to_dense() const;

private:
    index_t n_ = 0;
    index_t p_ = 0;
    std::vector<index_t> col_ptr_;  // p + 1
    std::vector<index_t> row_idx_;
    std::vector<double> vals_;
};

// -- Norms and spectral quantities -------------------------------------------

double frobenius_norm(const DesignMatrix& m);
double frobenius_norm(const SparseColumnMatrix& m);

struct PowerIterationResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Largest singular value by power iteration on m'm. Deterministic all-ones
/// start vector; convergence when successive estimates differ relatively by
/// less than tol. max_iter <= 0 selects the default 10 * rows(m). The _info
/// variants never throw; the plain ones throw NonConvergence at the cap.
PowerIterationResult spectral_norm_info(const DesignMatrix& m, double tol = 1e-9, index_t max_iter = 0);
PowerIterationResult spectral_norm_info(const SparseColumnMatrix& m, double tol = 1e-9, index_t max_iter = 0);
double spectral_norm(const DesignMatrix& m, double tol = 1e-9, index_t max_iter = 0);
double spectral_norm(const SparseColumnMatrix& m, double tol = 1e-9, index_t max_iter = 0);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
Vector symmetric_eigenvalues(const DesignMatrix& a);

/// kappa(m) = sigma_max / sigma_min, from the exact eigen-decomposition of the
/// p-by-p Gram matrix. Throws RankDeficient when sigma_min < 1e-12 sigma_max.
double condition_number(const DesignMatrix& m);

// -- Linear solves ------------------------------------------------------------

/// LU factorization with partial pivoting of a square matrix. Valid for
/// non-symmetric input (X*'X is not symmetric in general). Pivots smaller
/// than 1e-12 * max|a| raise SingularSystem.
class PivotedLu {
public:
    explicit PivotedLu(const DesignMatrix& a);

    Vector solve(const Vector& b) const;
    Vector solve_transpose(const Vector& b) const;
    index_t size() const { return p_; }

private:
    index_t p_ = 0;
    Vector lu_;                    // column-major, L unit-lower / U upper
    std::vector<index_t> pivots_;  // row swapped with k at step k
};

/// Solve a z = b with the residual contract ||a z - b|| <= 1e-8 ||b||.
/// One step of iterative refinement is applied before giving up.
Vector gram_solve(const DesignMatrix& a, const Vector& b);

// -- Products -----------------------------------------------------------------

/// X*'X: entry (i, j) sums value * x(row, j) over the stored nonzeros of
/// column i of xstar. Cost proportional to nnz(xstar) * p.
DesignMatrix sparse_gram(const SparseColumnMatrix& xstar, const DesignMatrix& x);

/// X*'X*.
DesignMatrix sparse_self_gram(const SparseColumnMatrix& xstar);

/// X*'y.
Vector sparse_transpose_matvec(const SparseColumnMatrix& xstar, const Vector& y);

/// X'X (symmetric, computed once per pair).
DesignMatrix dense_gram(const DesignMatrix& x);

/// A'B for dense matrices with matching row counts.
DesignMatrix dense_cross_gram(const DesignMatrix& a, const DesignMatrix& b);

/// X'y.
Vector dense_transpose_matvec(const DesignMatrix& x, const Vector& y);

/// X beta.
Vector matvec(const DesignMatrix& x, const Vector& beta);

// -- Small vector helpers -----------------------------------------------------

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);            // Euclidean norm
double norm2_squared(const Vector& v);

}  // namespace core_elements
