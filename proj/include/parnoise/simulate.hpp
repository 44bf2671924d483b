#pragma once

#include "parnoise/model.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace parnoise {

/// Observations y_1..y_{NT}; values[t-1] holds y_t, so season of values[j] is j % period + 1.
struct Trajectory {
    std::vector<double> values;
    int period = 1;
    std::size_t n_cycles = 0;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Checks length == n_cycles * period and that every value is finite.
void validate(const Trajectory& y);

inline constexpr int kDefaultBurnInCycles = 100;

/**
 * @brief Simulates the PAR recursion with i.i.d. N(0, sigma_xi2) innovations.
 *
 * Pre-sample values are zero; the first burn_in_cycles * T samples are discarded.
 * The output depends only on the arguments. Throws std::invalid_argument for a
 * non-causal model.
 */
[[nodiscard]] Trajectory simulate_par(const ParModel& model, std::size_t n_cycles, std::uint64_t seed,
                                      int burn_in_cycles = kDefaultBurnInCycles);

/// i.i.d. draws from the noise family. Mixture components use independent sub-streams.
[[nodiscard]] Trajectory sample_noise(const NoiseModel& noise, std::size_t length, std::uint64_t seed,
                                      int period = 1);

/// Y = X + Z element-wise.
[[nodiscard]] Trajectory corrupt(const Trajectory& signal, const Trajectory& noise);

}  // namespace parnoise
