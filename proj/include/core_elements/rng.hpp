#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "core_elements/errors.hpp"

namespace core_elements {

/// Deterministic random source. The engine state is fully specified by the
/// standard (mt19937_64) and every distribution below is implemented here, so
/// streams are reproducible bit-for-bit across platforms and standard
/// libraries. All randomized operations in the library take an Rng& argument;
/// nothing draws from a global source.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_(seed)) {}

    /// Independent child stream derived from (seed, stream_id). Used to give
    /// each replication / method cell its own stream so that concurrent
    /// execution cannot change the numbers.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t s = mix_(seed) ^ mix_(0x9E3779B97F4A7C15ull * (stream_id + 1));
        return Rng(s);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via the Marsaglia polar method (cached spare).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    /// Chi-squared with small integer degrees of freedom (sum of squares).
    double chi_squared(int df) {
        double s = 0.0;
        for (int i = 0; i < df; ++i) {
            const double z = normal();
            s += z * z;
        }
        return s;
    }

    double student_t(int df) { return normal() / std::sqrt(chi_squared(df) / df); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Unbiased integer in [0, n) by rejection.
    std::int64_t uniform_index(std::int64_t n) {
        if (n <= 0) throw Error("uniform_index: n must be positive");
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<std::int64_t>(x % un);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::int64_t i = static_cast<std::int64_t>(v.size()) - 1; i > 0; --i) {
            const std::int64_t j = uniform_index(i + 1);
            std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
        }
    }

private:
    static std::uint64_t mix_(std::uint64_t x) {
        // SplitMix64 finalizer; spreads low-entropy seeds over the state space.
        x += 0x9E3779B97F4A7C15ull;
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBull;
        x ^= x >> 31;
        return x;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace core_elements
