#pragma once

#include <cstdint>
#include <random>

namespace parnoise {

using Engine = std::mt19937_64;

/// Labels for independent random streams derived from one master seed.
enum class Stream : std::uint64_t {
    Signal = 1,
    Noise = 2,
    NoiseGaussian = 3,
    NoiseOutliers = 4,
    Trial = 5,
    NullReplication = 6,
    PowerTrial = 7,
};

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based derivation: the seed of (master, stream, index) depends on nothing else,
/// so Monte Carlo job k can be generated without touching jobs 0..k-1.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index = 0) noexcept;

[[nodiscard]] Engine make_engine(std::uint64_t seed);

}  // namespace parnoise
