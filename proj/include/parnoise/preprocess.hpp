#pragma once

#include "parnoise/simulate.hpp"

#include <span>

namespace parnoise {

struct HuberOptions {
    double c = 1.345;
    double tol = 1e-8;
    int max_iter = 100;
};

/**
 * @brief Huber location M-estimate by iteratively reweighted averaging.
 *
 * Scale is fixed once at 1.4826 * MAD around the median; when the MAD is zero but the
 * data are not constant, 1.2533 * mean absolute deviation around the median is used
 * instead. Constant data return the constant.
 */
[[nodiscard]] double huber_location(std::span<const double> values, const HuberOptions& options = {});

enum class Centering { None, PerSeasonMean, PerSeasonHuber };

struct PreprocessSpec {
    bool log_transform = false;
    Centering center = Centering::None;
    HuberOptions huber;
};

/// Natural log (if requested), then subtraction of a per-season location estimate.
[[nodiscard]] Trajectory preprocess(const Trajectory& y, const PreprocessSpec& spec);

}  // namespace parnoise
