#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

#include "core_elements/matrix.hpp"
#include "core_elements/selection.hpp"

namespace core_elements {

/// A fitted coefficient vector together with the method that produced it and
/// optional numeric diagnostics.
struct CoefficientVector {
    Vector beta;
    std::string method;
    std::map<std::string, double> diagnostics;
};

/// Full-sample OLS: solves (X'X) beta = X'y.
CoefficientVector ols_full(const DesignMatrix& x, const Vector& y);

/// Core-elements estimator: select the per-column top-r sketch X*, then solve
/// (X*'X) beta = X*'y. Total cost O(np + rp^2 + p^3).
CoefficientVector core_estimate(const DesignMatrix& x, const Vector& y, SketchBudget budget);

/// Same estimator on a sketch that was already constructed.
CoefficientVector core_estimate_with_sketch(const DesignMatrix& x, const Vector& y,
                                            const SparseColumnMatrix& sketch);

/// Unweighted OLS on the listed rows (duplicates allowed for with-replacement
/// samples).
CoefficientVector row_subsample_ols(const DesignMatrix& x, const Vector& y,
                                    std::span<const index_t> rows,
                                    std::string_view tag = "row_subsample");

/// Inverse-probability weighted OLS for randomized row samplers: each sampled
/// row is scaled by sqrt(1 / (r * pi_i)) in both the design and the response.
CoefficientVector row_subsample_ols_weighted(const DesignMatrix& x, const Vector& y,
                                             std::span<const index_t> rows,
                                             const Vector& probabilities,
                                             std::string_view tag = "row_subsample_weighted");

/// Leverage scores h_i = x_i' (X'X)^{-1} x_i, clamped to [0, 1]. Their sum
/// equals p within 1e-6 or RankDeficientDesign is thrown.
Vector leverage_scores(const DesignMatrix& x);

}  // namespace core_elements
