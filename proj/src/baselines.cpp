#include "core_elements/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "core_elements/estimators.hpp"
#include "core_elements/partial_select.hpp"

namespace core_elements {

namespace {

// r independent draws from the discrete distribution given by pi, by inverse
// CDF over the cumulative sums.
std::vector<index_t> draw_with_replacement(const Vector& pi, index_t r, Rng& rng) {
    const std::size_t n = pi.size();
    Vector cum(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += pi[i];
        cum[i] = acc;
    }
    std::vector<index_t> rows(static_cast<std::size_t>(r));
    for (index_t k = 0; k < r; ++k) {
        const double u = rng.uniform() * acc;
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cum.begin());
        if (idx >= n) idx = n - 1;
        rows[static_cast<std::size_t>(k)] = static_cast<index_t>(idx);
    }
    return rows;
}

struct ValueEntry {
    double value;
    index_t row;
};

inline bool larger_first(const ValueEntry& a, const ValueEntry& b) {
    return a.value > b.value || (a.value == b.value && a.row < b.row);
}
inline bool smaller_first(const ValueEntry& a, const ValueEntry& b) {
    return a.value < b.value || (a.value == b.value && a.row < b.row);
}

}  // namespace

RowSample unif(index_t n, index_t r, Rng& rng) {
    if (r < 1) throw Error("unif: r must be at least 1");
    std::vector<index_t> rows(static_cast<std::size_t>(r));
    for (index_t k = 0; k < r; ++k) rows[static_cast<std::size_t>(k)] = rng.uniform_index(n);
    Vector pi(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    return {std::move(rows), std::move(pi), "unif"};
}

RowSample blev(const DesignMatrix& x, index_t r, Rng& rng) {
    const Vector h = leverage_scores(x);
    double total = 0.0;
    for (double v : h) total += v;
    // Normalize by the actual sum (= p up to 1e-6) so the recorded
    // distribution sums to one exactly.
    Vector pi(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) pi[i] = h[i] / total;
    auto rows = draw_with_replacement(pi, r, rng);
    return {std::move(rows), std::move(pi), "blev"};
}

RowSample slev(const DesignMatrix& x, index_t r, double lambda, Rng& rng) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw Error("slev: lambda must lie in (0, 1]");
    const Vector h = leverage_scores(x);
    double total = 0.0;
    for (double v : h) total += v;
    const double n_inv = 1.0 / static_cast<double>(x.rows());
    Vector pi(h.size());
    double pisum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        pi[i] = lambda * h[i] / total + (1.0 - lambda) * n_inv;
        pisum += pi[i];
    }
    for (double& v : pi) v /= pisum;
    auto rows = draw_with_replacement(pi, r, rng);
    return {std::move(rows), std::move(pi), "slev"};
}

RowSample iboss(const DesignMatrix& x, index_t r) {
    const index_t n = x.rows(), p = x.cols();
    if (r > n) throw InsufficientRows("iboss: r exceeds the number of rows");
    if (r < 2 * p) throw Error("iboss: r must be at least 2p");

    const index_t base = r / (2 * p);
    index_t leftover = r - 2 * p * base;
    std::vector<index_t> extra_hi(static_cast<std::size_t>(p), 0);
    std::vector<index_t> extra_lo(static_cast<std::size_t>(p), 0);
    for (index_t j = 0; leftover > 0; ++j) {
        extra_hi[static_cast<std::size_t>(j)] += 1;
        if (--leftover > 0) {
            extra_lo[static_cast<std::size_t>(j)] += 1;
            --leftover;
        }
    }

    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    std::vector<index_t> rows;
    rows.reserve(static_cast<std::size_t>(r));
    std::vector<ValueEntry> buf;
    buf.reserve(static_cast<std::size_t>(n));

    auto pick = [&](index_t j, index_t count, bool largest) {
        if (count <= 0) return;
        buf.clear();
        auto col = x.column(j);
        for (index_t i = 0; i < n; ++i)
            if (!taken[static_cast<std::size_t>(i)])
                buf.push_back({col[static_cast<std::size_t>(i)], i});
        const std::size_t k = static_cast<std::size_t>(count);
        if (largest)
            detail::partial_select_top(buf.data(), buf.data() + buf.size(), k, larger_first);
        else
            detail::partial_select_top(buf.data(), buf.data() + buf.size(), k, smaller_first);
        for (std::size_t t = 0; t < k; ++t) {
            taken[static_cast<std::size_t>(buf[t].row)] = 1;
            rows.push_back(buf[t].row);
        }
    };

    for (index_t j = 0; j < p; ++j) {
        pick(j, base + extra_hi[static_cast<std::size_t>(j)], true);
        pick(j, base + extra_lo[static_cast<std::size_t>(j)], false);
    }

    std::sort(rows.begin(), rows.end());
    return {std::move(rows), std::nullopt, "iboss"};
}

}  // namespace core_elements
