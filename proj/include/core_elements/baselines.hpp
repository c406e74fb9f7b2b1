#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core_elements/matrix.hpp"
#include "core_elements/rng.hpp"

namespace core_elements {

/// A row subsample plus, for randomized methods, the sampling distribution
/// actually used (needed for inverse-probability reweighting). Randomized
/// methods draw with replacement; IBOSS rows are distinct.
struct RowSample {
    std::vector<index_t> rows;
    std::optional<Vector> probabilities;
    std::string method;
};

/// Uniform subsampling: r draws with replacement, pi_i = 1/n.
RowSample unif(index_t n, index_t r, Rng& rng);

/// Basic leverage subsampling: pi_i proportional to the leverage score h_i.
RowSample blev(const DesignMatrix& x, index_t r, Rng& rng);

/// Shrinkage leverage subsampling: pi_i = lambda h_i / p + (1 - lambda) / n.
RowSample slev(const DesignMatrix& x, index_t r, double lambda, Rng& rng);

/// Information-based optimal subset selection. Deterministic: cycling through
/// the columns, take the not-yet-selected rows with the largest and the
/// smallest x_ij, floor(r / 2p) of each. When 2p does not divide r, leftover
/// slots go to the earliest columns (one extra "largest" slot first, then one
/// extra "smallest"). Ties keep the smaller row index.
RowSample iboss(const DesignMatrix& x, index_t r);

}  // namespace core_elements
