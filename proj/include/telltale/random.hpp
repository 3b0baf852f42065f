#pragma once

#include <cstdint>
#include <random>

namespace telltale {

// Documented default seed for every subcommand.
inline constexpr std::uint64_t kDefaultSeed = 0x7E117A1EULL;

// SplitMix64 finalizer: derives independent child seeds from (seed, counter)
// so per-trial and per-permutation streams do not depend on thread schedule.
inline constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace telltale
