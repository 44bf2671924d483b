#pragma once

#include <functional>

namespace parnoise {

struct ScalarMinimum {
    double argmin = 0.0;
    double value = 0.0;
    int evaluations = 0;
    bool at_lower = false;  // argmin within tolerance of lo
    bool at_upper = false;  // argmin within tolerance of hi
};

inline constexpr int kMinimizeGridPoints = 201;

/// 1e-10 * (hi - lo) + 1e-14
[[nodiscard]] double default_minimize_tolerance(double lo, double hi) noexcept;

/**
 * @brief Global-ish minimization of a scalar function on [lo, hi].
 *
 * A 201-point grid locates the best cell, golden-section search refines it to an
 * absolute bracket width of `tol` (pass a non-positive tol for the default).
 * Deterministic. Throws NumericalError when f returns a non-finite value.
 */
[[nodiscard]] ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                            double tol = 0.0);

}  // namespace parnoise
