#include "core_elements/mom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core_elements/selection.hpp"

namespace core_elements {

BlockPartition partition(index_t n, index_t k, Rng& rng) {
    if (k < 1 || k > n) throw Error("partition: k must lie in [1, n]");
    std::vector<index_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), index_t{0});
    rng.shuffle(perm);

    BlockPartition part;
    part.k = k;
    part.assignment.assign(static_cast<std::size_t>(n), 0);
    part.blocks.resize(static_cast<std::size_t>(k));

    const index_t base = n / k;
    const index_t rem = n % k;
    std::size_t pos = 0;
    for (index_t l = 0; l < k; ++l) {
        const index_t size = base + (l < rem ? 1 : 0);
        auto& block = part.blocks[static_cast<std::size_t>(l)];
        block.assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                     perm.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(size)));
        std::sort(block.begin(), block.end());
        for (index_t row : block) part.assignment[static_cast<std::size_t>(row)] = l;
        pos += static_cast<std::size_t>(size);
    }
    return part;
}

Vector coordinate_median(const std::vector<Vector>& estimates) {
    if (estimates.empty()) throw EmptyInput("coordinate_median: empty estimate list");
    const std::size_t p = estimates.front().size();
    for (const auto& e : estimates)
        if (e.size() != p) throw DimensionMismatch("coordinate_median: unequal lengths");

    const std::size_t m = estimates.size();
    Vector out(p);
    Vector work(m);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t l = 0; l < m; ++l) work[l] = estimates[l][j];
        const std::size_t mid = m / 2;
        std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(mid), work.end());
        if (m % 2 == 1) {
            out[j] = work[mid];
        } else {
            const double hi = work[mid];
            std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(mid - 1),
                             work.begin() + static_cast<std::ptrdiff_t>(mid));
            out[j] = 0.5 * (work[mid - 1] + hi);
        }
    }
    return out;
}

index_t breakdown_budget(index_t k) {
    if (k < 1) throw Error("breakdown_budget: k must be at least 1");
    return k / 2;
}

index_t mom_outlier_tolerance(index_t k) {
    const index_t b = breakdown_budget(k);
    return b > 0 ? b - 1 : 0;
}

MomDiagnostics check_mom_conditions(const DesignMatrix& x, const BlockPartition& part,
                                    const std::vector<SparseColumnMatrix>& sketches) {
    if (sketches.size() != static_cast<std::size_t>(part.k))
        throw DimensionMismatch("check_mom_conditions: sketches do not align with the partition");

    MomDiagnostics diag;
    diag.blocks.resize(static_cast<std::size_t>(part.k));
    const index_t p = x.cols();

    double global_eig_max = 0.0;
    double global_eig_min = std::numeric_limits<double>::infinity();
    double h2_sup = 0.0;
    bool all_lambda0_ok = true;

    for (index_t l = 0; l < part.k; ++l) {
        auto& b = diag.blocks[static_cast<std::size_t>(l)];
        const auto& rows = part.blocks[static_cast<std::size_t>(l)];
        b.size = static_cast<index_t>(rows.size());
        const DesignMatrix xl = x.submatrix_rows(rows);
        const auto& sk = sketches[static_cast<std::size_t>(l)];
        if (sk.rows() != xl.rows() || sk.cols() != xl.cols())
            throw DimensionMismatch("check_mom_conditions: sketch dimensions disagree with block");

        const double nl = static_cast<double>(b.size);
        const DesignMatrix g = dense_gram(xl);
        DesignMatrix fisher = g;
        for (index_t j = 0; j < p; ++j)
            for (index_t i = 0; i < p; ++i) fisher(i, j) /= nl;
        const Vector ev = symmetric_eigenvalues(fisher);
        b.eig_min = ev.front();
        b.eig_max = ev.back();
        global_eig_max = std::max(global_eig_max, b.eig_max);
        global_eig_min = std::min(global_eig_min, b.eig_min);

        const DesignMatrix ll = residual_matrix(xl, sk);
        const double fl = frobenius_norm(ll);
        b.frob_l2_over_nl2 = fl * fl / (nl * nl);
        h2_sup = std::max(h2_sup, b.frob_l2_over_nl2);

        // lambda0^(l) = || (X'X)^{-1} L'X ||_2 on the block.
        try {
            const PivotedLu lu(g);
            const DesignMatrix ltx = dense_cross_gram(ll, xl);
            DesignMatrix z(p, p);
            Vector col(static_cast<std::size_t>(p));
            for (index_t j = 0; j < p; ++j) {
                for (index_t i = 0; i < p; ++i) col[static_cast<std::size_t>(i)] = ltx(i, j);
                const Vector zc = lu.solve(col);
                for (index_t i = 0; i < p; ++i) z(i, j) = zc[static_cast<std::size_t>(i)];
            }
            b.lambda0 = spectral_norm_info(z, 1e-9, 100000).value;
        } catch (const SingularSystem&) {
            b.singular_gram = true;
            b.lambda0 = std::numeric_limits<double>::quiet_NaN();
        }
        if (!(b.lambda0 < 1.0)) all_lambda0_ok = false;
    }

    diag.h1_satisfied = global_eig_min > 1e-12 * global_eig_max && std::isfinite(global_eig_max);
    diag.h2_small = h2_sup < 1.0;
    diag.h3_satisfied = all_lambda0_ok;
    return diag;
}

MomResult mom_core_estimate_with_partition(const DesignMatrix& x, const Vector& y, index_t r,
                                           const BlockPartition& part, bool condition_diagnostics) {
    const index_t k = part.k;
    const index_t p = x.cols();
    MomResult out;

    const index_t r_block = r / k;
    if (r_block < 1) throw Error("mom_core_estimate: per-block budget floor(r/k) is zero");
    if (r % k != 0)
        out.warnings.push_back("r is not divisible by k; remainder discarded");
    if (r_block < p)
        out.warnings.push_back("per-block budget below p; block Grams may be singular");

    std::vector<Vector> estimates;
    estimates.reserve(static_cast<std::size_t>(k));
    std::vector<SparseColumnMatrix> sketches;
    sketches.reserve(static_cast<std::size_t>(k));
    index_t dropped = 0;

    for (index_t l = 0; l < k; ++l) {
        const auto& rows = part.blocks[static_cast<std::size_t>(l)];
        const DesignMatrix xl = x.submatrix_rows(rows);
        Vector yl(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) yl[i] = y[static_cast<std::size_t>(rows[i])];

        const SelectionResult sel = select_core_elements(xl, SketchBudget(r_block));
        sketches.push_back(sel.sketch);
        try {
            estimates.push_back(core_estimate_with_sketch(xl, yl, sel.sketch).beta);
        } catch (const SingularSketchGram&) {
            ++dropped;
        }
    }

    if (estimates.empty())
        throw AllBlocksSingular("mom_core_estimate: every block produced a singular sketch Gram");
    if (dropped > 0)
        out.warnings.push_back(std::to_string(dropped) + " block(s) dropped from the median (singular Gram)");

    out.estimate.beta = coordinate_median(estimates);
    out.estimate.method = "mom_core";
    out.estimate.diagnostics["k"] = static_cast<double>(k);
    out.estimate.diagnostics["r_block"] = static_cast<double>(r_block);
    out.estimate.diagnostics["dropped_blocks"] = static_cast<double>(dropped);

    if (condition_diagnostics) {
        out.diagnostics = check_mom_conditions(x, part, sketches);
    } else {
        out.diagnostics.blocks.resize(static_cast<std::size_t>(k));
        for (index_t l = 0; l < k; ++l)
            out.diagnostics.blocks[static_cast<std::size_t>(l)].size =
                static_cast<index_t>(part.blocks[static_cast<std::size_t>(l)].size());
    }
    out.diagnostics.dropped_blocks = dropped;
    return out;
}

MomResult mom_core_estimate(const DesignMatrix& x, const Vector& y, index_t r, index_t k,
                            Rng& rng, bool condition_diagnostics) {
    const BlockPartition part = partition(x.rows(), k, rng);
    return mom_core_estimate_with_partition(x, y, r, part, condition_diagnostics);
}

}  // namespace core_elements
