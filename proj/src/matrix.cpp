#include "core_elements/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace core_elements {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw Error(what);
}

}  // namespace

DesignMatrix::DesignMatrix(index_t n, index_t p) : n_(n), p_(p) {
    require(n >= 1 && p >= 1, "DesignMatrix: dimensions must be positive");
    values_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(p), 0.0);
}

DesignMatrix::DesignMatrix(index_t n, index_t p, Vector values, bool centered)
    : n_(n), p_(p), values_(std::move(values)), centered_(centered) {
    require(n >= 1 && p >= 1, "DesignMatrix: dimensions must be positive");
    if (values_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(p))
        throw DimensionMismatch("DesignMatrix: value count does not match n*p");
    for (double v : values_)
        if (!std::isfinite(v)) throw Error("DesignMatrix: non-finite entry");
}

DesignMatrix DesignMatrix::identity(index_t p) {
    DesignMatrix m(p, p);
    for (index_t j = 0; j < p; ++j) m(j, j) = 1.0;
    return m;
}

void DesignMatrix::center_columns() {
    for (index_t j = 0; j < p_; ++j) {
        auto col = column(j);
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(n_);
        for (double& v : col) v -= mean;
    }
    centered_ = true;
}

DesignMatrix DesignMatrix::submatrix_rows(std::span<const index_t> rows) const {
    require(!rows.empty(), "submatrix_rows: empty row list");
    DesignMatrix out(static_cast<index_t>(rows.size()), p_);
    for (index_t j = 0; j < p_; ++j) {
        auto src = column(j);
        auto dst = out.column(j);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const index_t r = rows[i];
            require(r >= 0 && r < n_, "submatrix_rows: row index out of range");
            dst[i] = src[static_cast<std::size_t>(r)];
        }
    }
    return out;
}

SparseColumnMatrix::SparseColumnMatrix(index_t n, index_t p) : n_(n), p_(p) {
    require(n >= 1 && p >= 1, "SparseColumnMatrix: dimensions must be positive");
    col_ptr_.assign(static_cast<std::size_t>(p) + 1, 0);
}

SparseColumnMatrix::SparseColumnMatrix(
    index_t n, index_t p, const std::vector<std::vector<std::pair<index_t, double>>>& entries)
    : n_(n), p_(p) {
    require(n >= 1 && p >= 1, "SparseColumnMatrix: dimensions must be positive");
    if (entries.size() != static_cast<std::size_t>(p))
        throw DimensionMismatch("SparseColumnMatrix: column count mismatch");
    col_ptr_.assign(static_cast<std::size_t>(p) + 1, 0);
    std::size_t total = 0;
    for (const auto& col : entries) total += col.size();
    row_idx_.reserve(total);
    vals_.reserve(total);
    for (index_t j = 0; j < p; ++j) {
        index_t prev = -1;
        for (const auto& [row, value] : entries[static_cast<std::size_t>(j)]) {
            require(row >= 0 && row < n, "SparseColumnMatrix: row index out of range");
            require(row > prev, "SparseColumnMatrix: rows must be strictly increasing");
            require(value != 0.0, "SparseColumnMatrix: stored values must be nonzero");
            row_idx_.push_back(row);
            vals_.push_back(value);
            prev = row;
        }
        col_ptr_[static_cast<std::size_t>(j) + 1] = static_cast<index_t>(row_idx_.size());
    }
}

DesignMatrix SparseColumnMatrix::to_dense() const {
    DesignMatrix out(n_, p_);
    for (index_t j = 0; j < p_; ++j) {
        auto rows = column_rows(j);
        auto vals = column_values(j);
        auto col = out.column(j);
        for (std::size_t k = 0; k < rows.size(); ++k) col[static_cast<std::size_t>(rows[k])] = vals[k];
    }
    return out;
}

double frobenius_norm(const DesignMatrix& m) {
    double s = 0.0;
    for (double v : m.values()) s += v * v;
    return std::sqrt(s);
}

double frobenius_norm(const SparseColumnMatrix& m) {
    double s = 0.0;
    for (index_t j = 0; j < m.cols(); ++j)
        for (double v : m.column_values(j)) s += v * v;
    return std::sqrt(s);
}

namespace {

// Power iteration on m'm, abstracted over the two storage formats.
// apply(v, w) must compute w = m v; apply_t(w, u) must compute u = m' w.
template <typename Apply, typename ApplyT>
PowerIterationResult power_iterate(index_t n, index_t p, double tol, index_t max_iter,
                                   double frob, Apply&& apply, ApplyT&& apply_t) {
    PowerIterationResult res;
    if (frob == 0.0) {  // zero matrix; callers are expected to pass nonzero m
        res.converged = true;
        return res;
    }
    if (max_iter <= 0) max_iter = 10 * n;

    Vector v(static_cast<std::size_t>(p), 1.0 / std::sqrt(static_cast<double>(p)));
    Vector w(static_cast<std::size_t>(n), 0.0);
    Vector u(static_cast<std::size_t>(p), 0.0);

    // If the start vector happens to lie in the null space, restart from the
    // first basis vector with a nonzero image.
    apply(v, w);
    if (norm2_squared(w) == 0.0) {
        for (index_t j = 0; j < p; ++j) {
            std::fill(v.begin(), v.end(), 0.0);
            v[static_cast<std::size_t>(j)] = 1.0;
            apply(v, w);
            if (norm2_squared(w) != 0.0) break;
        }
        if (norm2_squared(w) == 0.0) {
            res.converged = true;  // no nonzero image found: treat as zero
            return res;
        }
    }

    double sigma_prev = -1.0;
    for (index_t it = 1; it <= max_iter; ++it) {
        const double sigma = std::sqrt(norm2_squared(w));
        res.value = sigma;
        res.iterations = static_cast<int>(it);
        if (sigma_prev >= 0.0 && std::abs(sigma - sigma_prev) < tol * sigma) {
            res.converged = true;
            return res;
        }
        sigma_prev = sigma;
        apply_t(w, u);
        const double un = norm2(u);
        if (un == 0.0) {  // v was dominated by the null space; sigma is exact
            res.converged = true;
            return res;
        }
        for (std::size_t i = 0; i < u.size(); ++i) v[i] = u[i] / un;
        apply(v, w);
    }
    return res;  // not converged
}

PowerIterationResult spectral_impl(const DesignMatrix& m, double tol, index_t max_iter) {
    const index_t n = m.rows(), p = m.cols();
    auto apply = [&](const Vector& v, Vector& w) {
        std::fill(w.begin(), w.end(), 0.0);
        for (index_t j = 0; j < p; ++j) {
            const double bj = v[static_cast<std::size_t>(j)];
            if (bj == 0.0) continue;
            auto col = m.column(j);
            for (index_t i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] += bj * col[static_cast<std::size_t>(i)];
        }
    };
    auto apply_t = [&](const Vector& w, Vector& u) {
        for (index_t j = 0; j < p; ++j) {
            auto col = m.column(j);
            double s = 0.0;
            for (index_t i = 0; i < n; ++i) s += col[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
            u[static_cast<std::size_t>(j)] = s;
        }
    };
    return power_iterate(n, p, tol, max_iter, frobenius_norm(m), apply, apply_t);
}

PowerIterationResult spectral_impl(const SparseColumnMatrix& m, double tol, index_t max_iter) {
    const index_t n = m.rows(), p = m.cols();
    auto apply = [&](const Vector& v, Vector& w) {
        std::fill(w.begin(), w.end(), 0.0);
        for (index_t j = 0; j < p; ++j) {
            const double bj = v[static_cast<std::size_t>(j)];
            if (bj == 0.0) continue;
            auto rows = m.column_rows(j);
            auto vals = m.column_values(j);
            for (std::size_t k = 0; k < rows.size(); ++k) w[static_cast<std::size_t>(rows[k])] += bj * vals[k];
        }
    };
    auto apply_t = [&](const Vector& w, Vector& u) {
        for (index_t j = 0; j < p; ++j) {
            auto rows = m.column_rows(j);
            auto vals = m.column_values(j);
            double s = 0.0;
            for (std::size_t k = 0; k < rows.size(); ++k) s += vals[k] * w[static_cast<std::size_t>(rows[k])];
            u[static_cast<std::size_t>(j)] = s;
        }
    };
    return power_iterate(n, p, tol, max_iter, frobenius_norm(m), apply, apply_t);
}

}  // namespace

PowerIterationResult spectral_norm_info(const DesignMatrix& m, double tol, index_t max_iter) {
    return spectral_impl(m, tol, max_iter);
}
PowerIterationResult spectral_norm_info(const SparseColumnMatrix& m, double tol, index_t max_iter) {
    return spectral_impl(m, tol, max_iter);
}

double spectral_norm(const DesignMatrix& m, double tol, index_t max_iter) {
    const auto r = spectral_impl(m, tol, max_iter);
    if (!r.converged)
        throw NonConvergence("spectral_norm: power iteration hit the iteration cap", r.value, r.iterations);
    return r.value;
}
double spectral_norm(const SparseColumnMatrix& m, double tol, index_t max_iter) {
    const auto r = spectral_impl(m, tol, max_iter);
    if (!r.converged)
        throw NonConvergence("spectral_norm: power iteration hit the iteration cap", r.value, r.iterations);
    return r.value;
}

Vector symmetric_eigenvalues(const DesignMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("symmetric_eigenvalues: matrix must be square");
    const index_t p = a.rows();
    DesignMatrix w = a;

    auto off_norm = [&]() {
        double s = 0.0;
        for (index_t j = 0; j < p; ++j)
            for (index_t i = 0; i < p; ++i)
                if (i != j) s += w(i, j) * w(i, j);
        return std::sqrt(s);
    };

    const double scale = frobenius_norm(w);
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > 1e-14 * (scale > 0 ? scale : 1.0); ++sweep) {
        for (index_t q = 1; q < p; ++q) {
            for (index_t pp = 0; pp < q; ++pp) {
                const double apq = w(pp, q);
                if (apq == 0.0) continue;
                const double app = w(pp, pp), aqq = w(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (index_t k = 0; k < p; ++k) {
                    const double akp = w(k, pp), akq = w(k, q);
                    w(k, pp) = c * akp - s * akq;
                    w(k, q) = s * akp + c * akq;
                }
                for (index_t k = 0; k < p; ++k) {
                    const double apk = w(pp, k), aqk = w(q, k);
                    w(pp, k) = c * apk - s * aqk;
                    w(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    Vector ev(static_cast<std::size_t>(p));
    for (index_t j = 0; j < p; ++j) ev[static_cast<std::size_t>(j)] = w(j, j);
    std::sort(ev.begin(), ev.end());
    return ev;
}

double condition_number(const DesignMatrix& m) {
    const DesignMatrix g = dense_gram(m);
    const Vector ev = symmetric_eigenvalues(g);
    const double lmax = ev.back();
    const double lmin = std::max(ev.front(), 0.0);
    const double smax = std::sqrt(std::max(lmax, 0.0));
    const double smin = std::sqrt(lmin);
    if (smin < 1e-12 * smax || smax == 0.0)
        throw RankDeficient("condition_number: smallest singular value below 1e-12 of the largest");
    return smax / smin;
}

PivotedLu::PivotedLu(const DesignMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("PivotedLu: matrix must be square");
    p_ = a.rows();
    lu_ = a.values();
    pivots_.assign(static_cast<std::size_t>(p_), 0);

    double max_abs = 0.0;
    for (double v : lu_) max_abs = std::max(max_abs, std::abs(v));
    const double tiny = 1e-12 * max_abs;

    auto at = [&](index_t i, index_t j) -> double& { return lu_[static_cast<std::size_t>(j * p_ + i)]; };

    for (index_t k = 0; k < p_; ++k) {
        index_t piv = k;
        double best = std::abs(at(k, k));
        for (index_t i = k + 1; i < p_; ++i) {
            const double v = std::abs(at(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= tiny || best == 0.0)
            throw SingularSystem("PivotedLu: pivot below 1e-12 of max entry");
        pivots_[static_cast<std::size_t>(k)] = piv;
        if (piv != k)
            for (index_t j = 0; j < p_; ++j) std::swap(at(k, j), at(piv, j));
        const double inv = 1.0 / at(k, k);
        for (index_t i = k + 1; i < p_; ++i) {
            const double m = at(i, k) * inv;
            at(i, k) = m;
            if (m == 0.0) continue;
            for (index_t j = k + 1; j < p_; ++j) at(i, j) -= m * at(k, j);
        }
    }
}

Vector PivotedLu::solve(const Vector& b) const {
    if (b.size() != static_cast<std::size_t>(p_)) throw DimensionMismatch("PivotedLu::solve: size mismatch");
    Vector x = b;
    auto at = [&](index_t i, index_t j) { return lu_[static_cast<std::size_t>(j * p_ + i)]; };
    for (index_t k = 0; k < p_; ++k)
        if (pivots_[static_cast<std::size_t>(k)] != k)
            std::swap(x[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(pivots_[static_cast<std::size_t>(k)])]);
    for (index_t i = 1; i < p_; ++i) {
        double s = x[static_cast<std::size_t>(i)];
        for (index_t j = 0; j < i; ++j) s -= at(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s;
    }
    for (index_t i = p_ - 1; i >= 0; --i) {
        double s = x[static_cast<std::size_t>(i)];
        for (index_t j = i + 1; j < p_; ++j) s -= at(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s / at(i, i);
    }
    return x;
}

Vector PivotedLu::solve_transpose(const Vector& b) const {
    if (b.size() != static_cast<std::size_t>(p_)) throw DimensionMismatch("PivotedLu::solve_transpose: size mismatch");
    // A = P' L U, so A' x = U' L' P x: forward-solve U', back-solve L', undo swaps.
    Vector x = b;
    auto at = [&](index_t i, index_t j) { return lu_[static_cast<std::size_t>(j * p_ + i)]; };
    for (index_t i = 0; i < p_; ++i) {
        double s = x[static_cast<std::size_t>(i)];
        for (index_t j = 0; j < i; ++j) s -= at(j, i) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s / at(i, i);
    }
    for (index_t i = p_ - 1; i >= 0; --i) {
        double s = x[static_cast<std::size_t>(i)];
        for (index_t j = i + 1; j < p_; ++j) s -= at(j, i) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s;
    }
    for (index_t k = p_ - 1; k >= 0; --k)
        if (pivots_[static_cast<std::size_t>(k)] != k)
            std::swap(x[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(pivots_[static_cast<std::size_t>(k)])]);
    return x;
}

namespace {

Vector residual_of(const DesignMatrix& a, const Vector& x, const Vector& b) {
    Vector r = b;
    const index_t p = a.cols();
    for (index_t j = 0; j < p; ++j) {
        const double xj = x[static_cast<std::size_t>(j)];
        if (xj == 0.0) continue;
        auto col = a.column(j);
        for (index_t i = 0; i < a.rows(); ++i) r[static_cast<std::size_t>(i)] -= col[static_cast<std::size_t>(i)] * xj;
    }
    return r;
}

}  // namespace

Vector gram_solve(const DesignMatrix& a, const Vector& b) {
    if (a.rows() != a.cols()) throw DimensionMismatch("gram_solve: matrix must be square");
    if (b.size() != static_cast<std::size_t>(a.rows())) throw DimensionMismatch("gram_solve: rhs size mismatch");
    const PivotedLu lu(a);
    Vector x = lu.solve(b);
    const double nb = norm2(b);
    Vector r = residual_of(a, x, b);
    if (norm2(r) > 1e-8 * nb) {
        const Vector dx = lu.solve(r);  // one refinement step
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
        r = residual_of(a, x, b);
        if (norm2(r) > 1e-8 * nb)
            throw SingularSystem("gram_solve: residual contract ||az-b|| <= 1e-8 ||b|| not met");
    }
    return x;
}

DesignMatrix sparse_gram(const SparseColumnMatrix& xstar, const DesignMatrix& x) {
    if (xstar.rows() != x.rows() || xstar.cols() != x.cols())
        throw DimensionMismatch("sparse_gram: dimensions disagree");
    const index_t p = x.cols();
    DesignMatrix g(p, p);
    for (index_t j = 0; j < p; ++j) {
        auto xcol = x.column(j);
        for (index_t i = 0; i < p; ++i) {
            auto rows = xstar.column_rows(i);
            auto vals = xstar.column_values(i);
            double s = 0.0;
            for (std::size_t k = 0; k < rows.size(); ++k) s += vals[k] * xcol[static_cast<std::size_t>(rows[k])];
            g(i, j) = s;
        }
    }
    return g;
}

DesignMatrix sparse_self_gram(const SparseColumnMatrix& xstar) {
    const index_t p = xstar.cols();
    DesignMatrix g(p, p);
    for (index_t i = 0; i < p; ++i) {
        auto ri = xstar.column_rows(i);
        auto vi = xstar.column_values(i);
        for (index_t j = i; j < p; ++j) {
            auto rj = xstar.column_rows(j);
            auto vj = xstar.column_values(j);
            double s = 0.0;
            std::size_t a = 0, b = 0;  // sorted-row merge
            while (a < ri.size() && b < rj.size()) {
                if (ri[a] == rj[b]) {
                    s += vi[a] * vj[b];
                    ++a;
                    ++b;
                } else if (ri[a] < rj[b]) {
                    ++a;
                } else {
                    ++b;
                }
            }
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

Vector sparse_transpose_matvec(const SparseColumnMatrix& xstar, const Vector& y) {
    if (y.size() != static_cast<std::size_t>(xstar.rows()))
        throw DimensionMismatch("sparse_transpose_matvec: size mismatch");
    const index_t p = xstar.cols();
    Vector out(static_cast<std::size_t>(p), 0.0);
    for (index_t j = 0; j < p; ++j) {
        auto rows = xstar.column_rows(j);
        auto vals = xstar.column_values(j);
        double s = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) s += vals[k] * y[static_cast<std::size_t>(rows[k])];
        out[static_cast<std::size_t>(j)] = s;
    }
    return out;
}

DesignMatrix dense_gram(const DesignMatrix& x) {
    const index_t n = x.rows(), p = x.cols();
    DesignMatrix g(p, p);
    for (index_t i = 0; i < p; ++i) {
        auto ci = x.column(i);
        for (index_t j = i; j < p; ++j) {
            auto cj = x.column(j);
            double s = 0.0;
            for (index_t k = 0; k < n; ++k) s += ci[static_cast<std::size_t>(k)] * cj[static_cast<std::size_t>(k)];
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

DesignMatrix dense_cross_gram(const DesignMatrix& a, const DesignMatrix& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("dense_cross_gram: row counts disagree");
    const index_t n = a.rows(), pa = a.cols(), pb = b.cols();
    DesignMatrix g(pa, pb);
    for (index_t j = 0; j < pb; ++j) {
        auto cb = b.column(j);
        for (index_t i = 0; i < pa; ++i) {
            auto ca = a.column(i);
            double s = 0.0;
            for (index_t k = 0; k < n; ++k) s += ca[static_cast<std::size_t>(k)] * cb[static_cast<std::size_t>(k)];
            g(i, j) = s;
        }
    }
    return g;
}

Vector dense_transpose_matvec(const DesignMatrix& x, const Vector& y) {
    if (y.size() != static_cast<std::size_t>(x.rows()))
        throw DimensionMismatch("dense_transpose_matvec: size mismatch");
    const index_t n = x.rows(), p = x.cols();
    Vector out(static_cast<std::size_t>(p), 0.0);
    for (index_t j = 0; j < p; ++j) {
        auto col = x.column(j);
        double s = 0.0;
        for (index_t i = 0; i < n; ++i) s += col[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(j)] = s;
    }
    return out;
}

Vector matvec(const DesignMatrix& x, const Vector& beta) {
    if (beta.size() != static_cast<std::size_t>(x.cols()))
        throw DimensionMismatch("matvec: size mismatch");
    const index_t n = x.rows(), p = x.cols();
    Vector out(static_cast<std::size_t>(n), 0.0);
    for (index_t j = 0; j < p; ++j) {
        const double bj = beta[static_cast<std::size_t>(j)];
        if (bj == 0.0) continue;
        auto col = x.column(j);
        for (index_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] += bj * col[static_cast<std::size_t>(i)];
    }
    return out;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2_squared(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double norm2(const Vector& v) { return std::sqrt(norm2_squared(v)); }

}  // namespace core_elements
