#include "parnoise/testing.hpp"

#include "parnoise/acvf.hpp"
#include "parnoise/errors.hpp"
#include "parnoise/parallel.hpp"
#include "parnoise/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace parnoise {

int resolve_thread_count(int requested) {
    if (const char* env = std::getenv(kThreadsEnvVar)) {
        char* end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && value >= 0) {
            requested = static_cast<int>(value);
        }
    }
    if (requested <= 0) {
        requested = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    return requested;
}

namespace {

void check_options(Method method, const NoiseTestOptions& options) {
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
    if (options.replications < 1) {
        throw std::invalid_argument("number of Monte Carlo replications must be >= 1");
    }
    if (!estimates_noise_variance(method)) {
        throw std::invalid_argument("method " + to_string(method) + " does not estimate the noise variance");
    }
}

std::optional<double> try_statistic(const Trajectory& y, int order, Method method, const EstimatorOptions& options) {
    try {
        const double value = noise_statistic(y, order, method, options);
        if (std::isfinite(value)) {
            return value;
        }
    } catch (const NumericalError&) {
    }
    return std::nullopt;
}

}  // namespace

double empirical_quantile(std::vector<double> samples, double level) {
    if (samples.empty()) {
        throw std::invalid_argument("empirical_quantile: no samples");
    }
    if (!(level >= 0.0 && level <= 1.0)) {
        throw std::invalid_argument("empirical_quantile: level must lie in [0, 1]");
    }
    std::sort(samples.begin(), samples.end());
    const double h = (static_cast<double>(samples.size()) - 1.0) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, samples.size() - 1);
    return samples[lo] + (h - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

bool outside_region(double statistic, double lower, double upper) noexcept {
    return statistic > upper || statistic < lower;
}

double noise_statistic(const Trajectory& y, int order, Method method, const EstimatorOptions& options) {
    const AcvfTable table = acvf_table(y, required_max_lag(method, order, options));
    const EstimationResult fit = estimate(method, table, order, options);
    return fit.sigma_z2_hat.value_or(std::numeric_limits<double>::quiet_NaN());
}

NullDistribution simulate_null(const ParModel& model, std::size_t n_cycles, Method method,
                               const NoiseTestOptions& options) {
    check_options(method, options);
    const StabilityReport stability = is_causal(model);
    if (!stability.causal) {
        throw NumericalError(
            "null model is not causal (spectral radius " + std::to_string(stability.spectral_radius) +
            "); re-specify the order/period or shrink the fitted coefficients towards zero before testing");
    }
    const auto m = static_cast<std::size_t>(options.replications);
    std::vector<std::optional<double>> slots(m);
    parallel_for(m, options.threads, [&](std::size_t k) {
        const Trajectory x = simulate_par(model, n_cycles, derive_seed(options.seed, Stream::NullReplication, k),
                                          options.burn_in_cycles);
        slots[k] = try_statistic(x, model.order, method, options.estimator);
    });

    NullDistribution null;
    null.samples.reserve(m);
    for (const auto& s : slots) {
        if (s) {
            null.samples.push_back(*s);
        } else {
            ++null.failures;
        }
    }
    if (static_cast<double>(null.failures) > options.max_failure_fraction * static_cast<double>(m)) {
        throw NumericalError("estimation failed on " + std::to_string(null.failures) + " of " + std::to_string(m) +
                             " null replications");
    }
    return null;
}

NoiseTestReport decide(Method method, double statistic, NullDistribution null, const NoiseTestOptions& options) {
    NoiseTestReport report;
    report.method = method;
    report.statistic = statistic;
    report.alpha = options.alpha;
    report.replications = options.replications;
    report.region = options.region;
    report.seed = options.seed;
    report.failed_replications = null.failures;
    if (options.region == Region::OneSided) {
        report.lower_threshold = -std::numeric_limits<double>::infinity();
        report.threshold = empirical_quantile(null.samples, 1.0 - options.alpha);
    } else {
        report.lower_threshold = empirical_quantile(null.samples, options.alpha / 2.0);
        report.threshold = empirical_quantile(null.samples, 1.0 - options.alpha / 2.0);
    }
    report.null_samples = std::move(null.samples);
    report.reject = outside_region(statistic, report.lower_threshold, report.threshold);
    return report;
}

NoiseTestReport noise_variance_test(const Trajectory& y, int order, Method method, const NoiseTestOptions& options) {
    check_options(method, options);
    validate(y);
    const AcvfTable table = acvf_table(y, required_max_lag(method, order, options.estimator));
    EstimationResult fit = estimate(method, table, order, options.estimator);
    if (!fit.coefficients_ok() || !fit.sigma_z2_hat || !std::isfinite(*fit.sigma_z2_hat)) {
        throw NumericalError("estimation on the data failed; cannot build the null model");
    }
    if (!(fit.sigma_xi2_hat > 0.0)) {
        throw NumericalError("fitted innovation variance is not positive; cannot simulate the null model");
    }
    const ParModel null_model = fit.fitted_model();
    NullDistribution null = simulate_null(null_model, y.n_cycles, method, options);
    NoiseTestReport report = decide(method, *fit.sigma_z2_hat, std::move(null), options);
    report.fit = std::move(fit);
    return report;
}

NoiseTestReport noise_variance_test_known(const Trajectory& y, const ParModel& null_model, Method method,
                                          const NoiseTestOptions& options) {
    check_options(method, options);
    validate(y);
    const AcvfTable table = acvf_table(y, required_max_lag(method, null_model.order, options.estimator));
    EstimationResult fit = estimate(method, table, null_model.order, options.estimator);
    if (!fit.sigma_z2_hat || !std::isfinite(*fit.sigma_z2_hat)) {
        throw NumericalError("estimation on the data failed");
    }
    NullDistribution null = simulate_null(null_model, y.n_cycles, method, options);
    NoiseTestReport report = decide(method, *fit.sigma_z2_hat, std::move(null), options);
    report.fit = std::move(fit);
    return report;
}

std::vector<PowerPoint> power_curve(const ParModel& model, const NoiseModel& noise, const std::vector<double>& betas,
                                    Method method, const PowerOptions& options) {
    check_options(method, options.test);
    validate(model);
    validate(noise);
    if (options.trials < 1) {
        throw std::invalid_argument("power_curve: trials must be >= 1");
    }
    for (double b : betas) {
        if (!(b >= 0.0 && b <= 1.0)) {
            throw std::invalid_argument("power_curve: beta values must lie in [0, 1]");
        }
    }

    double lower = 0.0;
    double upper = 0.0;
    if (options.null_mode == NullMode::KnownModel) {
        const NullDistribution null = simulate_null(model, options.n_cycles, method, options.test);
        const NoiseTestReport region = decide(method, 0.0, null, options.test);
        lower = region.lower_threshold;
        upper = region.threshold;
    }

    const auto trials = static_cast<std::size_t>(options.trials);
    std::vector<PowerPoint> curve;
    curve.reserve(betas.size());
    for (double beta : betas) {
        const NoiseModel scaled = scale_noise(noise, beta);
        // 1 = reject, 0 = accept, -1 = failed
        std::vector<int> outcome(trials, -1);
        auto run_trial = [&](std::size_t k) {
            const std::uint64_t trial_seed = derive_seed(options.test.seed, Stream::PowerTrial, k);
            const Trajectory x =
                simulate_par(model, options.n_cycles, derive_seed(trial_seed, Stream::Signal), options.test.burn_in_cycles);
            const Trajectory z = sample_noise(scaled, x.size(), derive_seed(trial_seed, Stream::Noise), model.period);
            const Trajectory y = corrupt(x, z);
            if (options.null_mode == NullMode::KnownModel) {
                const auto stat = try_statistic(y, model.order, method, options.test.estimator);
                if (stat) {
                    outcome[k] = outside_region(*stat, lower, upper) ? 1 : 0;
                }
                return;
            }
            NoiseTestOptions per_trial = options.test;
            per_trial.seed = derive_seed(trial_seed, Stream::NullReplication);
            per_trial.threads = 1;
            try {
                outcome[k] = noise_variance_test(y, model.order, method, per_trial).reject ? 1 : 0;
            } catch (const NumericalError&) {
            }
        };
        parallel_for(trials, options.test.threads, run_trial);

        PowerPoint point;
        point.beta = beta;
        int rejections = 0;
        for (int o : outcome) {
            if (o < 0) {
                ++point.failures;
            } else {
                ++point.trials;
                rejections += o;
            }
        }
        point.power = point.trials > 0 ? static_cast<double>(rejections) / point.trials
                                       : std::numeric_limits<double>::quiet_NaN();
        curve.push_back(point);
    }
    return curve;
}

}  // namespace parnoise
