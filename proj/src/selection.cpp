#include "core_elements/selection.hpp"

#include <algorithm>
#include <cmath>

#include "core_elements/partial_select.hpp"

namespace core_elements {

namespace {

struct Candidate {
    double abs;
    index_t row;
};

// Exact top-r rows (|value| descending, row ascending on ties) from the
// candidate list, which must contain every row whose magnitude reaches the
// selection threshold and be sorted by row. Appends to rows/entries.
void emit_selection(std::span<const double> col, std::vector<Candidate>& cand, index_t r,
                    std::vector<index_t>& rows,
                    std::vector<std::pair<index_t, double>>& col_entries) {
    static thread_local std::vector<double> mags;
    mags.resize(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) mags[i] = cand[i].abs;
    detail::partial_select_top(mags.data(), mags.data() + mags.size(), static_cast<std::size_t>(r),
                               [](double a, double b) { return a > b; });
    double threshold = mags[0];
    for (index_t k = 1; k < r; ++k) threshold = std::min(threshold, mags[static_cast<std::size_t>(k)]);

    index_t above = 0;
    for (const Candidate& c : cand)
        if (c.abs > threshold) ++above;
    index_t tie_quota = r - above;  // boundary ties that still fit

    rows.reserve(static_cast<std::size_t>(r));
    col_entries.reserve(static_cast<std::size_t>(r));
    for (const Candidate& c : cand) {
        if (c.abs < threshold) continue;
        if (c.abs == threshold) {
            if (tie_quota == 0) continue;
            --tie_quota;  // ascending scan: smaller row indices win the ties
        }
        rows.push_back(c.row);
        const double v = col[static_cast<std::size_t>(c.row)];
        if (v != 0.0) col_entries.emplace_back(c.row, v);
    }
}

}  // namespace

SelectionResult select_core_elements(const DesignMatrix& x, SketchBudget budget) {
    const index_t n = x.rows();
    const index_t p = x.cols();

    SelectionResult out;
    index_t r = budget.r;
    if (r > n) {
        out.warnings.push_back("r exceeds n; clamped to n (full selection)");
        r = n;
    }
    if (r < p)
        out.warnings.push_back("r below p; the sketch Gram may be singular");

    out.mask.columns.assign(static_cast<std::size_t>(p), {});
    std::vector<std::vector<std::pair<index_t, double>>> entries(static_cast<std::size_t>(p));

    static thread_local std::vector<Candidate> cand;

    for (index_t j = 0; j < p; ++j) {
        auto col = x.column(j);
        auto& rows = out.mask.columns[static_cast<std::size_t>(j)];
        auto& col_entries = entries[static_cast<std::size_t>(j)];
        cand.clear();

        // For large columns, a strided sample gives a lower bound t on the
        // selection threshold; one streaming pass then gathers only the rows
        // with |x_ij| >= t and the exact selection runs on that short list.
        // Zero-heavy or unlucky samples fall back to the full column.
        bool gathered = false;
        if (n >= 16384 && r < n) {
            constexpr index_t sample_size = 1024;
            double sample[sample_size];
            const index_t stride = n / sample_size;
            for (index_t s = 0; s < sample_size; ++s)
                sample[s] = std::abs(col[static_cast<std::size_t>(s * stride)]);
            const double top_fraction = static_cast<double>(r) / static_cast<double>(n);
            index_t rank = static_cast<index_t>(std::ceil(top_fraction * sample_size));
            rank += 3 * static_cast<index_t>(std::sqrt(static_cast<double>(rank))) + 8;
            rank = std::min(rank, sample_size);
            detail::partial_select_top(sample, sample + sample_size, static_cast<std::size_t>(rank),
                                       [](double a, double b) { return a > b; });
            double t = sample[0];
            for (index_t s = 1; s < rank; ++s) t = std::min(t, sample[s]);

            if (t > 0.0) {
                for (index_t i = 0; i < n; ++i) {
                    const double a = std::abs(col[static_cast<std::size_t>(i)]);
                    if (a >= t) cand.push_back({a, i});
                }
                gathered = static_cast<index_t>(cand.size()) >= r;
            }
        }
        if (!gathered) {
            cand.resize(static_cast<std::size_t>(n));
            for (index_t i = 0; i < n; ++i)
                cand[static_cast<std::size_t>(i)] = {std::abs(col[static_cast<std::size_t>(i)]), i};
        }

        emit_selection(col, cand, r, rows, col_entries);
    }

    out.sketch = SparseColumnMatrix(n, p, entries);
    return out;
}

DesignMatrix residual_matrix(const DesignMatrix& x, const SparseColumnMatrix& sketch) {
    if (x.rows() != sketch.rows() || x.cols() != sketch.cols())
        throw DimensionMismatch("residual_matrix: dimensions disagree");
    DesignMatrix l = x;
    for (index_t j = 0; j < x.cols(); ++j) {
        auto col = l.column(j);
        for (index_t row : sketch.column_rows(j)) col[static_cast<std::size_t>(row)] = 0.0;
    }
    return l;
}

}  // namespace core_elements
