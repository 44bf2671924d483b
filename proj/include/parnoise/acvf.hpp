#pragma once

#include "parnoise/model.hpp"
#include "parnoise/simulate.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace parnoise {

enum class AcvfSource { Empirical, Theoretical };

/**
 * @brief Periodic autocovariance gamma(w, k) = E[X_{nT+w} X_{nT+w-k}] for w in 1..T, |k| <= max_lag.
 *
 * Season arguments are reduced modulo the period on every access.
 */
class AcvfTable {
public:
    AcvfTable(int period, int max_lag, AcvfSource source, std::size_t n_cycles = 0);

    [[nodiscard]] double operator()(long long season, int lag) const;
    void set(long long season, int lag, double value);

    [[nodiscard]] int period() const noexcept { return period_; }
    [[nodiscard]] int max_lag() const noexcept { return max_lag_; }
    [[nodiscard]] AcvfSource source() const noexcept { return source_; }
    /// Number of cycles N of the source trajectory; 0 for theoretical tables.
    [[nodiscard]] std::size_t n_cycles() const noexcept { return n_cycles_; }

    /// Every entry multiplied by c.
    [[nodiscard]] AcvfTable scaled(double c) const;

private:
    [[nodiscard]] std::size_t index(long long season, int lag) const;

    int period_;
    int max_lag_;
    AcvfSource source_;
    std::size_t n_cycles_;
    std::vector<double> values_;
};

struct AcvfEstimate {
    double value = 0.0;
    bool empty_range = false;  // r < l: no product available for this (w, k)
};

/**
 * @brief Empirical periodic autocovariance
 *   (1/N) sum_{n=l}^{r} y_{nT+w} y_{nT+w-k}
 * with l, r the first and last cycles for which both indices fall inside 1..NT.
 * The signal is assumed to be zero-mean already; no centering happens here.
 */
[[nodiscard]] AcvfEstimate empirical_acvf_checked(const Trajectory& y, long long season, long long lag);
[[nodiscard]] double empirical_acvf(const Trajectory& y, long long season, long long lag);

/// Empirical table for all seasons and |k| <= max_lag.
[[nodiscard]] AcvfTable acvf_table(const Trajectory& y, int max_lag);

inline constexpr double kLyapunovTolerance = 1e-12;
inline constexpr long kLyapunovMaxIterations = 1'000'000;

/**
 * @brief Exact stationary autocovariance of the pure PAR process plus sigma_z2 at lag 0.
 *
 * Solves Sigma = A Sigma A' + sigma_xi2 B B' for the lifted system by fixed-point
 * iteration, then reads the seasonal covariances off A^j Sigma.
 */
[[nodiscard]] AcvfTable theoretical_acvf(const ParModel& model, double sigma_z2, int max_lag);

/**
 * Yule-Walker blocks of one season v:
 *   low_matrix(i,j)  = gamma(v-i, j-i),        i,j = 1..p
 *   low_vector(j)    = gamma(v, j),            j = 1..p
 *   high_matrix(i,j) = gamma(v-j, p+i-j),      i = 1..s, j = 1..p
 *   high_vector(i)   = gamma(v, p+i),          i = 1..s
 *   augmented        = [[gamma(v,0), low_vector'], [low_vector, low_matrix]]
 */
struct YwSystem {
    int season = 0;
    double lag0 = 0.0;
    Eigen::MatrixXd low_matrix;
    Eigen::VectorXd low_vector;
    Eigen::MatrixXd high_matrix;
    Eigen::VectorXd high_vector;
    Eigen::MatrixXd augmented;
};

[[nodiscard]] YwSystem build_system(const AcvfTable& table, int season, int order, int high_order_count);

/// One system per season 1..T. Requires table.max_lag() >= order + high_order_count.
[[nodiscard]] std::vector<YwSystem> build_systems(const AcvfTable& table, int order, int high_order_count);

}  // namespace parnoise
