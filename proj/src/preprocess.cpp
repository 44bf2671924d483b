#include "parnoise/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace parnoise {

namespace {

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace

double huber_location(std::span<const double> values, const HuberOptions& options) {
    if (values.empty()) {
        throw std::invalid_argument("huber_location: empty input");
    }
    if (!(options.c > 0.0)) {
        throw std::invalid_argument("huber_location: tuning constant c must be positive");
    }
    const double center = median(std::vector<double>(values.begin(), values.end()));
    std::vector<double> dev(values.size());
    std::transform(values.begin(), values.end(), dev.begin(), [center](double x) { return std::abs(x - center); });
    double scale = 1.4826 * median(dev);
    if (scale == 0.0) {
        const double mean_abs = std::accumulate(dev.begin(), dev.end(), 0.0) / static_cast<double>(dev.size());
        if (mean_abs == 0.0) {
            return values.front();
        }
        scale = 1.2533 * mean_abs;
    }

    double mu = center;
    for (int it = 0; it < options.max_iter; ++it) {
        double wsum = 0.0;
        double wxsum = 0.0;
        for (double x : values) {
            const double r = std::abs(x - mu) / scale;
            const double w = r <= options.c ? 1.0 : options.c / r;
            wsum += w;
            wxsum += w * x;
        }
        const double next = wxsum / wsum;
        const bool done = std::abs(next - mu) <= options.tol;
        mu = next;
        if (done) {
            break;
        }
    }
    return mu;
}

Trajectory preprocess(const Trajectory& y, const PreprocessSpec& spec) {
    validate(y);
    Trajectory out = y;
    if (spec.log_transform) {
        for (std::size_t t = 0; t < out.values.size(); ++t) {
            if (!(out.values[t] > 0.0)) {
                throw std::invalid_argument("log transform needs positive data; row " + std::to_string(t + 1) +
                                            " holds " + std::to_string(out.values[t]));
            }
            out.values[t] = std::log(out.values[t]);
        }
    }
    if (spec.center == Centering::None) {
        return out;
    }
    const auto T = static_cast<std::size_t>(out.period);
    for (std::size_t v = 0; v < T; ++v) {
        std::vector<double> season;
        season.reserve(out.n_cycles);
        for (std::size_t t = v; t < out.values.size(); t += T) {
            season.push_back(out.values[t]);
        }
        double location = 0.0;
        if (spec.center == Centering::PerSeasonMean) {
            location = std::accumulate(season.begin(), season.end(), 0.0) / static_cast<double>(season.size());
        } else {
            location = huber_location(season, spec.huber);
        }
        for (std::size_t t = v; t < out.values.size(); t += T) {
            out.values[t] -= location;
        }
    }
    return out;
}

}  // namespace parnoise
