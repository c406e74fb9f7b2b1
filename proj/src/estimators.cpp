#include "core_elements/estimators.hpp"

#include <cmath>

namespace core_elements {

CoefficientVector ols_full(const DesignMatrix& x, const Vector& y) {
    if (y.size() != static_cast<std::size_t>(x.rows()))
        throw DimensionMismatch("ols_full: response length mismatch");
    try {
        const DesignMatrix g = dense_gram(x);
        const Vector rhs = dense_transpose_matvec(x, y);
        return {gram_solve(g, rhs), "full_ols", {}};
    } catch (const SingularSystem& e) {
        throw RankDeficientDesign(std::string("ols_full: ") + e.what());
    }
}

CoefficientVector core_estimate_with_sketch(const DesignMatrix& x, const Vector& y,
                                            const SparseColumnMatrix& sketch) {
    if (y.size() != static_cast<std::size_t>(x.rows()))
        throw DimensionMismatch("core_estimate: response length mismatch");
    const index_t r = sketch.cols() > 0 ? sketch.column_nnz(0) : 0;
    try {
        const DesignMatrix g = sparse_gram(sketch, x);
        const Vector rhs = sparse_transpose_matvec(sketch, y);
        CoefficientVector out{gram_solve(g, rhs), "core", {}};
        out.diagnostics["nnz"] = static_cast<double>(sketch.nnz());
        return out;
    } catch (const SingularSystem& e) {
        throw SingularSketchGram(std::string("core_estimate: sketch Gram singular: ") + e.what(), r);
    }
}

CoefficientVector core_estimate(const DesignMatrix& x, const Vector& y, SketchBudget budget) {
    const SelectionResult sel = select_core_elements(x, budget);
    try {
        CoefficientVector out = core_estimate_with_sketch(x, y, sel.sketch);
        out.diagnostics["r"] = static_cast<double>(std::min(budget.r, x.rows()));
        return out;
    } catch (const SingularSketchGram&) {
        throw SingularSketchGram("core_estimate: sketch Gram singular; retry with a larger r", budget.r);
    }
}

namespace {

CoefficientVector subsample_fit(const DesignMatrix& xs, const Vector& ys, std::string_view tag) {
    try {
        const DesignMatrix g = dense_gram(xs);
        const Vector rhs = dense_transpose_matvec(xs, ys);
        return {gram_solve(g, rhs), std::string(tag), {}};
    } catch (const SingularSystem& e) {
        throw RankDeficientSubsample(std::string(tag) + ": " + e.what());
    }
}

}  // namespace

CoefficientVector row_subsample_ols(const DesignMatrix& x, const Vector& y,
                                    std::span<const index_t> rows, std::string_view tag) {
    if (static_cast<index_t>(rows.size()) < x.cols())
        throw RankDeficientSubsample("row_subsample_ols: fewer rows than columns");
    const DesignMatrix xs = x.submatrix_rows(rows);
    Vector ys(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) ys[i] = y[static_cast<std::size_t>(rows[i])];
    return subsample_fit(xs, ys, tag);
}

CoefficientVector row_subsample_ols_weighted(const DesignMatrix& x, const Vector& y,
                                             std::span<const index_t> rows,
                                             const Vector& probabilities, std::string_view tag) {
    if (static_cast<index_t>(rows.size()) < x.cols())
        throw RankDeficientSubsample("row_subsample_ols_weighted: fewer rows than columns");
    if (probabilities.size() != static_cast<std::size_t>(x.rows()))
        throw DimensionMismatch("row_subsample_ols_weighted: probability length mismatch");
    const double r = static_cast<double>(rows.size());
    DesignMatrix xs = x.submatrix_rows(rows);
    Vector ys(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double pi = probabilities[static_cast<std::size_t>(rows[i])];
        if (pi <= 0.0) throw Error("row_subsample_ols_weighted: sampled row has zero probability");
        const double w = std::sqrt(1.0 / (r * pi));
        ys[i] = w * y[static_cast<std::size_t>(rows[i])];
        for (index_t j = 0; j < xs.cols(); ++j) xs(static_cast<index_t>(i), j) *= w;
    }
    return subsample_fit(xs, ys, tag);
}

Vector leverage_scores(const DesignMatrix& x) {
    const index_t n = x.rows(), p = x.cols();
    Vector h(static_cast<std::size_t>(n), 0.0);
    try {
        const PivotedLu lu(dense_gram(x));
        Vector row(static_cast<std::size_t>(p));
        for (index_t i = 0; i < n; ++i) {
            for (index_t j = 0; j < p; ++j) row[static_cast<std::size_t>(j)] = x(i, j);
            const Vector z = lu.solve(row);
            double hi = dot(row, z);
            hi = std::min(std::max(hi, 0.0), 1.0);
            h[static_cast<std::size_t>(i)] = hi;
        }
    } catch (const SingularSystem& e) {
        throw RankDeficientDesign(std::string("leverage_scores: ") + e.what());
    }
    double sum = 0.0;
    for (double v : h) sum += v;
    if (std::abs(sum - static_cast<double>(p)) > 1e-6)
        throw RankDeficientDesign("leverage_scores: sum deviates from p beyond 1e-6");
    return h;
}

}  // namespace core_elements
