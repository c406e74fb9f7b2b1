#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

namespace core_elements::detail {

// Introspective quickselect: partitions v so that v[0..k) holds the k
// top-ranked elements under ranks_before (a strict total order), in
// unspecified internal order. Median-of-three pivots give expected linear
// time; a heap-select fallback bounds pathological pivot sequences by
// O(n log k) instead of degrading to quadratic. No call path sorts the
// whole buffer.
template <typename T, typename RanksBefore>
void heap_select_top(T* first, T* last, std::size_t k, RanksBefore ranks_before) {
    const std::size_t n = static_cast<std::size_t>(last - first);
    if (k == 0 || k >= n) return;
    // Heap over the current best k, with the worst of them on top.
    std::make_heap(first, first + k, ranks_before);
    for (T* it = first + k; it != last; ++it) {
        if (ranks_before(*it, *first)) {
            std::pop_heap(first, first + k, ranks_before);
            std::swap(first[k - 1], *it);
            std::push_heap(first, first + k, ranks_before);
        }
    }
}

template <typename T, typename RanksBefore>
void partial_select_top(T* first, T* last, std::size_t k, RanksBefore ranks_before) {
    std::size_t n = static_cast<std::size_t>(last - first);
    if (k == 0 || k >= n) return;

    int depth_budget = 2;
    for (std::size_t m = n; m > 1; m >>= 1) ++depth_budget;
    depth_budget *= 2;

    while (true) {
        n = static_cast<std::size_t>(last - first);
        if (k == 0 || k >= n) return;
        if (n <= 32 || depth_budget-- <= 0) {
            heap_select_top(first, last, k, ranks_before);
            return;
        }

        T pivot;
        if (n >= 4096) {
            // Floyd-Rivest style pivot: select the target quantile from a
            // strided sample, padded a little toward keeping extra elements
            // so the k-th stays on the kept side of the first partition.
            constexpr std::size_t sample_size = 512;
            T sample[sample_size];
            const std::size_t stride = n / sample_size;
            for (std::size_t s = 0; s < sample_size; ++s) sample[s] = first[s * stride];
            std::size_t target = k * sample_size / n + 24;
            if (target >= sample_size) target = sample_size - 1;
            partial_select_top(sample, sample + sample_size, target + 1, ranks_before);
            pivot = sample[0];
            for (std::size_t s = 1; s <= target; ++s)
                if (ranks_before(pivot, sample[s])) pivot = sample[s];
        } else {
            // Median of three.
            T a = first[0], b = first[n / 2], c = first[n - 1];
            if (ranks_before(b, a)) std::swap(a, b);
            if (ranks_before(c, b)) {
                std::swap(b, c);
                if (ranks_before(b, a)) std::swap(a, b);
            }
            pivot = b;
        }

        // Hoare partition around the (present) pivot value; duplicates are
        // fine, both scans stop on elements equal to the pivot.
        T* i = first - 1;
        T* j = last;
        while (true) {
            do {
                ++i;
            } while (ranks_before(*i, pivot));
            do {
                --j;
            } while (ranks_before(pivot, *j));
            if (i >= j) break;
            std::swap(*i, *j);
        }
        // [first, j] ranks no later than pivot; (j, last) no earlier.
        const std::size_t left = static_cast<std::size_t>(j - first) + 1;
        if (k <= left) {
            last = j + 1;
        } else {
            first = j + 1;
            k -= left;
        }
    }
}

}  // namespace core_elements::detail
