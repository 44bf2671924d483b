#include "parnoise/simulate.hpp"

#include "parnoise/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace parnoise {

void validate(const Trajectory& y) {
    if (y.period < 1) {
        throw std::invalid_argument("trajectory period must be >= 1");
    }
    if (y.values.size() != y.n_cycles * static_cast<std::size_t>(y.period)) {
        throw std::invalid_argument("trajectory length " + std::to_string(y.values.size()) +
                                    " is not n_cycles * period = " + std::to_string(y.n_cycles) + " * " +
                                    std::to_string(y.period));
    }
    for (std::size_t t = 0; t < y.values.size(); ++t) {
        if (!std::isfinite(y.values[t])) {
            throw std::invalid_argument("trajectory has a non-finite value at t=" + std::to_string(t + 1));
        }
    }
}

Trajectory simulate_par(const ParModel& model, std::size_t n_cycles, std::uint64_t seed, int burn_in_cycles) {
    validate(model);
    if (n_cycles == 0) {
        throw std::invalid_argument("n_cycles must be positive");
    }
    if (burn_in_cycles < 0) {
        throw std::invalid_argument("burn_in_cycles must be nonnegative");
    }
    const StabilityReport stability = is_causal(model);
    if (!stability.causal) {
        throw std::invalid_argument("cannot simulate a non-causal PAR model (monodromy spectral radius " +
                                    std::to_string(stability.spectral_radius) + ")");
    }

    const int p = model.order;
    const int T = model.period;
    const std::size_t burn = static_cast<std::size_t>(burn_in_cycles) * static_cast<std::size_t>(T);
    const std::size_t keep = n_cycles * static_cast<std::size_t>(T);
    const std::size_t total = burn + keep;

    Engine engine = make_engine(seed);
    std::normal_distribution<double> innovation(0.0, std::sqrt(model.sigma_xi2));

    // p leading zeros act as the pre-sample.
    std::vector<double> x(total + static_cast<std::size_t>(p), 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        const std::size_t pos = t + static_cast<std::size_t>(p);
        const int v = static_cast<int>(t % static_cast<std::size_t>(T));
        double value = innovation(engine);
        for (int i = 1; i <= p; ++i) {
            value += model.phi(v, i - 1) * x[pos - static_cast<std::size_t>(i)];
        }
        x[pos] = value;
    }

    Trajectory out;
    out.period = T;
    out.n_cycles = n_cycles;
    out.seed = seed;
    const auto first = x.begin() + static_cast<std::ptrdiff_t>(burn + static_cast<std::size_t>(p));
    out.values.assign(first, x.end());
    return out;
}

namespace {

double draw_outlier(Engine& engine, double magnitude, double prob_each) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
    if (u < prob_each) {
        return magnitude;
    }
    if (u < 2.0 * prob_each) {
        return -magnitude;
    }
    return 0.0;
}

}  // namespace

Trajectory sample_noise(const NoiseModel& noise, std::size_t length, std::uint64_t seed, int period) {
    validate(noise);
    if (period < 1 || length % static_cast<std::size_t>(period) != 0) {
        throw std::invalid_argument("noise length must be a multiple of the period");
    }
    Trajectory out;
    out.period = period;
    out.n_cycles = length / static_cast<std::size_t>(period);
    out.seed = seed;
    out.values.assign(length, 0.0);

    if (const auto* g = std::get_if<GaussianNoise>(&noise)) {
        Engine engine = make_engine(seed);
        std::normal_distribution<double> dist(0.0, std::sqrt(g->variance));
        for (double& z : out.values) {
            z = dist(engine);
        }
    } else if (const auto* o = std::get_if<TwoPointOutliers>(&noise)) {
        Engine engine = make_engine(seed);
        for (double& z : out.values) {
            z = draw_outlier(engine, o->magnitude, o->prob_each);
        }
    } else if (const auto* m = std::get_if<MixtureNoise>(&noise)) {
        Engine gauss_engine = make_engine(derive_seed(seed, Stream::NoiseGaussian));
        Engine outlier_engine = make_engine(derive_seed(seed, Stream::NoiseOutliers));
        std::normal_distribution<double> dist(0.0, std::sqrt(m->gauss_variance));
        for (double& z : out.values) {
            z = dist(gauss_engine);
            z += draw_outlier(outlier_engine, m->magnitude, m->prob_each);
        }
    }
    return out;
}

Trajectory corrupt(const Trajectory& signal, const Trajectory& noise) {
    if (signal.values.size() != noise.values.size()) {
        throw std::invalid_argument("length mismatch: signal has " + std::to_string(signal.values.size()) +
                                    " samples, noise has " + std::to_string(noise.values.size()));
    }
    if (signal.period != noise.period) {
        throw std::invalid_argument("period mismatch between signal and noise");
    }
    Trajectory out = signal;
    for (std::size_t t = 0; t < out.values.size(); ++t) {
        out.values[t] += noise.values[t];
    }
    return out;
}

}  // namespace parnoise
