#pragma once

#include "parnoise/acvf.hpp"
#include "parnoise/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace parnoise {

/**
 * Estimation methods for noise-corrupted PAR models.
 *  - M1: high-order Yule-Walker with s = p.
 *  - M2: errors-in-variables, per-season noise variance from the high-order cost.
 *  - M3: errors-in-variables with one noise variance shared by all seasons.
 *  - M4: constrained least squares, alternating updates, stacked final solve.
 *  - M5: classical Yule-Walker (ignores additive noise).
 */
enum class Method { M1, M2, M3, M4, M5 };

[[nodiscard]] std::string to_string(Method method);
/// Accepts "M1".."M5" (case-insensitive).
[[nodiscard]] Method parse_method(const std::string& text);
[[nodiscard]] bool estimates_noise_variance(Method method) noexcept;

struct EstimatorOptions {
    int high_order_count = 0;  // s; 0 means s = p
    double delta0 = 1e-3;      // M4 bisection tolerance on f(D)
    double delta = 1e-3;       // M4 relative-change tolerance
    int max_iter = 200;        // M4 alternation cap
    double init_upper_fraction = 0.9999;
    double singular_condition = 1e12;
    double phi1_guard = 1e-6;  // M1: |phi_1(v)| below this leaves sigma_Z^2(v) undefined
};

struct SeasonDiagnostics {
    double condition_number = 0.0;
    int iterations = 0;
    bool converged = true;
    bool singular = false;                // coefficient solve failed; phi row is NaN
    bool excluded_from_variance = false;  // left out of the variance means
    bool boundary = false;                // noise-variance minimum on the upper interval end
    bool degenerate_interval = false;     // min-eig <= 0, noise variance forced to 0
    bool bisection_failed = false;        // M4 initialisation found no sign change
    std::string note;
};

/**
 * Per-season estimates and their season means. Variance estimates are raw: they may be
 * negative, see clamped() for a presentation view.
 */
struct EstimationResult {
    Method method = Method::M5;
    int order = 0;
    int period = 0;
    Eigen::MatrixXd phi_hat;  // period x order
    double sigma_xi2_hat = 0.0;
    std::optional<double> sigma_z2_hat;  // absent for M5
    std::vector<double> sigma_xi2_by_season;
    std::vector<double> sigma_z2_by_season;  // empty for M5
    std::vector<SeasonDiagnostics> diagnostics;

    /// True when every season produced finite coefficients.
    [[nodiscard]] bool coefficients_ok() const;
    /// The pure PAR model (phi_hat, sigma_xi2_hat); throws when it is not a valid ParModel.
    [[nodiscard]] ParModel fitted_model() const;
    /// Copy with every variance estimate clamped at zero.
    [[nodiscard]] EstimationResult clamped() const;
};

/// Largest lag an estimator reads from the table.
[[nodiscard]] int required_max_lag(Method method, int order, const EstimatorOptions& options = {});

[[nodiscard]] EstimationResult estimate_m1(const AcvfTable& table, int order, const EstimatorOptions& options = {});
[[nodiscard]] EstimationResult estimate_m2(const AcvfTable& table, int order, const EstimatorOptions& options = {});
[[nodiscard]] EstimationResult estimate_m3(const AcvfTable& table, int order, const EstimatorOptions& options = {});
[[nodiscard]] EstimationResult estimate_m4(const AcvfTable& table, int order, const EstimatorOptions& options = {});
[[nodiscard]] EstimationResult estimate_m5(const AcvfTable& table, int order, const EstimatorOptions& options = {});

[[nodiscard]] EstimationResult estimate(Method method, const AcvfTable& table, int order,
                                        const EstimatorOptions& options = {});

/// Phi*(sigma) = (Gamma_v - sigma I)^{-1} gamma_v.
[[nodiscard]] Eigen::VectorXd noise_adjusted_coefficients(const YwSystem& sys, double sigma);

/// J_v(sigma) = || high_matrix Phi*(sigma) - high_vector ||^2.
[[nodiscard]] double high_order_cost(const YwSystem& sys, double sigma);

/// Smallest eigenvalue of the symmetric part of a square matrix.
[[nodiscard]] double min_eigenvalue(const Eigen::MatrixXd& m);

/// M4 initialisation function f(D) = gamma(v,0) - D - gamma_v' (Gamma_v - D I)^{-1} gamma_v.
[[nodiscard]] double m4_init_function(const YwSystem& sys, double d);

/// One constrained update of the coefficients for a fixed noise variance (M4).
[[nodiscard]] Eigen::VectorXd m4_coefficient_update(const YwSystem& sys, double sigma);

/// Noise-variance update from the current coefficients (M4).
[[nodiscard]] double m4_variance_update(const YwSystem& sys, const Eigen::VectorXd& phi);

}  // namespace parnoise
