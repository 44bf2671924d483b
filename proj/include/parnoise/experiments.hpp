#pragma once

#include "parnoise/estimators.hpp"
#include "parnoise/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace parnoise {

/// Monte Carlo estimation study of one model/noise configuration.
struct CaseConfig {
    std::string name;
    ParModel model;
    NoiseModel noise;
    std::size_t n_cycles = 80;
    int trials = 1000;
    std::vector<Method> methods{Method::M1, Method::M2, Method::M3, Method::M4, Method::M5};
    EstimatorOptions estimator;
    std::uint64_t master_seed = 0;
    int burn_in_cycles = 100;
    double max_failure_fraction = 0.1;
    /// Methods whose failure rate is reported but never fatal.
    std::vector<Method> failure_tolerant;
};

/// The p=2, T=3 model of the simulation study with the given phi_2(1).
[[nodiscard]] ParModel study_model(double phi2_season1);

/// case1..case4 (Gaussian noise), case1a/case2a (outliers), case1b/case2b (mixture).
[[nodiscard]] CaseConfig case_preset(const std::string& name);
[[nodiscard]] std::vector<std::string> preset_names();

struct CoefficientStats {
    int lag = 0;
    int season = 0;
    std::string label;  // "phi<lag>(<season>)"
    double truth = 0.0;
    double mse = 0.0;
    std::vector<double> estimates;  // one per trial, NaN where the trial failed
};

struct MethodStats {
    Method method = Method::M5;
    std::vector<CoefficientStats> coefficients;  // lag-major: phi1(1..T), phi2(1..T), ...
    double average_mse = 0.0;
    int failures = 0;
    int used = 0;
};

struct StudyResult {
    std::string case_name;
    int trials = 0;
    std::vector<MethodStats> methods;

    [[nodiscard]] const MethodStats& of(Method method) const;
};

/// Mean squared deviation from `truth`; throws on an empty list.
[[nodiscard]] double mse(std::span<const double> estimates, double truth);

[[nodiscard]] std::string coefficient_label(int lag, int season);

/**
 * Simulates `trials` noisy trajectories and estimates every requested method on each
 * (same trajectories for all methods). Results depend only on the config, not on
 * `threads`. Throws NumericalError when a non-tolerant method fails on more than
 * max_failure_fraction of the trials.
 */
[[nodiscard]] StudyResult run_case_study(const CaseConfig& config, int threads = 1);

/// CSV: method,coefficient_label,true_value,mse (one row per method x coefficient, plus "average").
void write_mse_csv(std::ostream& os, const StudyResult& result);

/// CSV: one column per method x coefficient, one row per trial; failed trials are "NA".
void write_boxplot_csv(std::ostream& os, const StudyResult& result);

/// Human-readable table with 4 significant digits.
void write_mse_table(std::ostream& os, const StudyResult& result);

}  // namespace parnoise
