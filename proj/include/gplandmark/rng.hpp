#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace gplandmark {

// Seeded random helpers built directly on the mt19937_64 bit stream.
// std::uniform_*_distribution is not pinned down by the standard, so mapping
// the raw draws ourselves keeps outputs identical across standard libraries.

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform_unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(gen);
}

/// Unbiased uniform integer in [0, n) via rejection sampling.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = gen();
        if (x >= threshold) return x % n;
    }
}

/// Standard normal via Box-Muller.
inline double standard_normal(std::mt19937_64& gen) {
    double u1 = uniform_unit(gen);
    while (u1 <= 0.0) u1 = uniform_unit(gen);
    const double u2 = uniform_unit(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// k distinct indices drawn uniformly from [0, n), in draw order (partial Fisher-Yates).
inline std::vector<std::ptrdiff_t> sample_without_replacement(std::mt19937_64& gen,
                                                              std::ptrdiff_t n,
                                                              std::ptrdiff_t k) {
    std::vector<std::ptrdiff_t> pool(static_cast<std::size_t>(n));
    for (std::ptrdiff_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<std::ptrdiff_t> out;
    out.reserve(static_cast<std::size_t>(k));
    for (std::ptrdiff_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::ptrdiff_t>(
                               uniform_below(gen, static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        out.push_back(pool[static_cast<std::size_t>(i)]);
    }
    return out;
}

} // namespace gplandmark
