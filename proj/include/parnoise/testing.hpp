#pragma once

#include "parnoise/estimators.hpp"
#include "parnoise/model.hpp"
#include "parnoise/simulate.hpp"

#include <cstdint>
#include <vector>

namespace parnoise {

/// One-sided region (-inf, Q_{1-alpha}] or two-sided [Q_{alpha/2}, Q_{1-alpha/2}].
enum class Region { OneSided, TwoSided };

struct NoiseTestOptions {
    double alpha = 0.05;
    int replications = 1000;  // M
    std::uint64_t seed = 0;
    Region region = Region::OneSided;
    EstimatorOptions estimator;
    int burn_in_cycles = kDefaultBurnInCycles;
    double max_failure_fraction = 0.1;
    int threads = 1;
};

struct NullDistribution {
    std::vector<double> samples;  // successful replications, in replication order
    int failures = 0;
};

struct NoiseTestReport {
    Method method = Method::M2;
    double statistic = 0.0;
    double alpha = 0.05;
    int replications = 0;
    Region region = Region::OneSided;
    double lower_threshold = 0.0;  // -inf for the one-sided region
    double threshold = 0.0;        // upper end of the acceptance region
    std::vector<double> null_samples;
    int failed_replications = 0;
    bool reject = false;
    std::uint64_t seed = 0;
    EstimationResult fit;  // estimate on the data that defined the null model
};

/// Empirical quantile with linear interpolation between order statistics (Hyndman-Fan type 7).
[[nodiscard]] double empirical_quantile(std::vector<double> samples, double level);

/// Acceptance region is closed: a statistic equal to a threshold is accepted.
[[nodiscard]] bool outside_region(double statistic, double lower, double upper) noexcept;

/// Raw sigma_Z^2 estimate of `method` on a trajectory.
[[nodiscard]] double noise_statistic(const Trajectory& y, int order, Method method,
                                     const EstimatorOptions& options = {});

/// sigma_Z^2 estimates on M pure-PAR trajectories of the given length simulated from `model`.
[[nodiscard]] NullDistribution simulate_null(const ParModel& model, std::size_t n_cycles, Method method,
                                             const NoiseTestOptions& options);

/// Builds the acceptance region from `null_samples` and decides for `statistic`.
[[nodiscard]] NoiseTestReport decide(Method method, double statistic, NullDistribution null,
                                     const NoiseTestOptions& options);

/**
 * @brief Monte Carlo test of H0: pure PAR against H1: PAR plus additive noise.
 *
 * Fits the noise-corrupted model to `y` with `method`, simulates M pure-PAR
 * trajectories from the fitted (phi, sigma_xi2), re-estimates sigma_Z^2 on each
 * and compares the data statistic with the empirical quantile(s).
 * Throws NumericalError when the fitted model cannot be simulated or more than
 * max_failure_fraction of the replications fail.
 */
[[nodiscard]] NoiseTestReport noise_variance_test(const Trajectory& y, int order, Method method,
                                                  const NoiseTestOptions& options);

/// Same test with the null model supplied instead of fitted.
[[nodiscard]] NoiseTestReport noise_variance_test_known(const Trajectory& y, const ParModel& null_model,
                                                        Method method, const NoiseTestOptions& options);

/// How the power study builds acceptance regions.
enum class NullMode {
    KnownModel,  // one region from the true model, reused by every trial
    Refit,       // full test (fit + M replications) per trial
};

struct PowerOptions {
    NoiseTestOptions test;
    int trials = 1000;
    std::size_t n_cycles = 80;
    NullMode null_mode = NullMode::KnownModel;
};

struct PowerPoint {
    double beta = 0.0;
    double power = 0.0;
    int trials = 0;    // trials that produced a decision
    int failures = 0;  // trials whose estimation failed
};

/**
 * Rejection rate of the test on trajectories with noise standard deviation scaled by
 * beta. Trial k uses the same signal and noise draws for every beta.
 */
[[nodiscard]] std::vector<PowerPoint> power_curve(const ParModel& model, const NoiseModel& noise,
                                                  const std::vector<double>& betas, Method method,
                                                  const PowerOptions& options);

}  // namespace parnoise
