#pragma once

#include <cstdint>
#include <random>

namespace despar {

using Rng = std::mt19937_64;

/// Seed used when the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20210517;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent, reproducible stream `stream` under a master seed.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace despar
