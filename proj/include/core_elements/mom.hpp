#pragma once

#include <string>
#include <vector>

#include "core_elements/estimators.hpp"
#include "core_elements/matrix.hpp"
#include "core_elements/rng.hpp"

namespace core_elements {

/// Random even partition of 0..n-1 into k blocks. Block sizes differ by at
/// most one (the first n mod k blocks get the extra row); rows within a block
/// are kept sorted ascending so block extraction is deterministic.
struct BlockPartition {
    index_t k = 0;
    std::vector<index_t> assignment;           // length n, block id per row
    std::vector<std::vector<index_t>> blocks;  // rows per block, sorted
};

BlockPartition partition(index_t n, index_t k, Rng& rng);

/// Per-block quantities behind the (H.1)-(H.3) regularity conditions, plus
/// satisfied/violated flags. Thresholds: H.1 requires the smallest block
/// Fisher-information eigenvalue to exceed 1e-12 of the largest over blocks,
/// H.2 reports sup_l ||L^(l)||_F^2 / n_l^2 and flags it below 1, H.3 requires
/// every lambda0^(l) < 1.
struct MomDiagnostics {
    struct Block {
        index_t size = 0;
        double eig_min = 0.0;
        double eig_max = 0.0;           // of I^(l) = X^(l)'X^(l) / n_l
        double frob_l2_over_nl2 = 0.0;  // ||L^(l)||_F^2 / n_l^2
        double lambda0 = 0.0;           // ||(X^(l)'X^(l))^{-1} L^(l)'X^(l)||_2
        bool singular_gram = false;
    };
    std::vector<Block> blocks;
    bool h1_satisfied = false;
    bool h2_small = false;
    bool h3_satisfied = false;
    index_t dropped_blocks = 0;
};

struct MomResult {
    CoefficientVector estimate;
    MomDiagnostics diagnostics;
    std::vector<std::string> warnings;
};

/// MOM core-elements: per-block core estimate at budget floor(r / k), then
/// the coordinate-wise median across blocks. Blocks whose sketch Gram is
/// singular are dropped from the median (counted in the diagnostics); if none
/// survive, AllBlocksSingular is thrown. Any remainder of r / k is discarded
/// with a warning, as is a per-block budget below p. With
/// condition_diagnostics the (H.1)-(H.3) quantities are computed per block;
/// timed callers can switch that off.
MomResult mom_core_estimate(const DesignMatrix& x, const Vector& y, index_t r, index_t k,
                            Rng& rng, bool condition_diagnostics = true);

MomResult mom_core_estimate_with_partition(const DesignMatrix& x, const Vector& y, index_t r,
                                           const BlockPartition& part,
                                           bool condition_diagnostics = true);

/// Coordinate-wise median: middle order statistic for an odd count, midpoint
/// of the two central order statistics for an even count.
Vector coordinate_median(const std::vector<Vector>& estimates);

/// Number of corrupted observations at which the median may break:
/// floor(k / 2). Strictly fewer corrupted blocks are tolerated.
index_t breakdown_budget(index_t k);

/// Largest tolerated count of corrupted blocks: floor(k / 2) - 1, at least 0.
index_t mom_outlier_tolerance(index_t k);

/// (H.1)-(H.3) diagnostics for given block sketches (aligned with the
/// partition).
MomDiagnostics check_mom_conditions(const DesignMatrix& x, const BlockPartition& part,
                                    const std::vector<SparseColumnMatrix>& sketches);

}  // namespace core_elements
