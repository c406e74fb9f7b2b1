#pragma once

#include <string>
#include <vector>

#include "core_elements/matrix.hpp"

namespace core_elements {

/// Per-column element budget of the sketch; the total element count is r * p.
struct SketchBudget {
    index_t r;
    explicit SketchBudget(index_t r) : r(r) {
        if (r < 1) throw Error("SketchBudget: r must be at least 1");
    }
};

/// Row indices selected per column, each list sorted ascending with exactly
/// min(r, n) entries.
struct SelectionMask {
    std::vector<std::vector<index_t>> columns;
};

struct SelectionResult {
    SelectionMask mask;
    SparseColumnMatrix sketch;
    std::vector<std::string> warnings;  // r clamped to n, or r < p
};

/// Keep the r largest |x_ij| per column and zero the rest. Partition-based
/// partial selection per column, O(n p) overall; never a full sort. Ties at
/// the selection boundary keep the smaller row index. Selected entries that
/// are exactly zero stay in the mask but are not stored in the sketch.
/// r > n is clamped to n with a warning.
SelectionResult select_core_elements(const DesignMatrix& x, SketchBudget budget);

/// L = X - X*, densely. Diagnostic path only.
DesignMatrix residual_matrix(const DesignMatrix& x, const SparseColumnMatrix& sketch);

}  // namespace core_elements
