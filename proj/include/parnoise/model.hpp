#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <variant>

namespace parnoise {

/// Maps any season argument onto the canonical range 1..period.
[[nodiscard]] int normalize_season(long long season, int period);

/**
 * @brief Periodic autoregressive model PAR(p) with period T.
 *
 * Row v-1 of `phi` holds the coefficients of season v, column i-1 holds lag i:
 *   X_{nT+v} = sum_i phi(v-1, i-1) X_{nT+v-i} + xi_{nT+v},  Var(xi) = sigma_xi2.
 *
 * Plain value type; call validate() before handing it to any numerical routine.
 */
struct ParModel {
    int order = 0;
    int period = 0;
    Eigen::MatrixXd phi;
    double sigma_xi2 = 0.0;

    /// Coefficient phi_lag(season); the season is taken modulo the period.
    [[nodiscard]] double coefficient(long long season, int lag) const;
};

/// Throws std::invalid_argument naming the offending field when an invariant fails.
void validate(const ParModel& model);

struct NoNoise {};

struct GaussianNoise {
    double variance = 0.0;
};

/// Z = +magnitude or -magnitude with probability prob_each each, 0 otherwise.
struct TwoPointOutliers {
    double magnitude = 0.0;
    double prob_each = 0.0;
};

/// Independent sum of N(0, gauss_variance) and two-point outliers.
struct MixtureNoise {
    double gauss_variance = 0.0;
    double magnitude = 0.0;
    double prob_each = 0.0;
};

using NoiseModel = std::variant<NoNoise, GaussianNoise, TwoPointOutliers, MixtureNoise>;

void validate(const NoiseModel& noise);

/// Closed-form variance of the noise family.
[[nodiscard]] double noise_variance(const NoiseModel& noise);

/// Scales the noise standard deviation by beta (magnitudes by beta, variances by beta^2).
[[nodiscard]] NoiseModel scale_noise(const NoiseModel& noise, double beta);

[[nodiscard]] std::string describe(const NoiseModel& noise);

/**
 * @brief First-order representation of the PAR recursion over one full period.
 *
 * The state S_n stacks the last `dimension` = ceil(p/T)*T observations of cycle n,
 * newest first: S_n[a] = X_{nT+T-a}. One period later
 *   S_{n+1} = transition * S_n + input * (xi_{(n+1)T+1}, ..., xi_{(n+1)T+T})'.
 * `transition` is the monodromy matrix of the periodic recursion.
 */
struct LiftedSystem {
    int dimension = 0;
    Eigen::MatrixXd transition;
    Eigen::MatrixXd input;
};

[[nodiscard]] LiftedSystem lift(const ParModel& model);

struct StabilityReport {
    bool causal = false;
    double spectral_radius = 0.0;
};

inline constexpr double kStabilityMargin = 1e-9;

/// Causal iff the monodromy spectral radius is below 1 - kStabilityMargin.
[[nodiscard]] StabilityReport is_causal(const ParModel& model);

}  // namespace parnoise
