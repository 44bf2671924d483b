#include "parnoise/optimize.hpp"

#include "parnoise/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace parnoise {

double default_minimize_tolerance(double lo, double hi) noexcept { return 1e-10 * (hi - lo) + 1e-14; }

ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("minimize_scalar: need finite lo <= hi");
    }
    if (tol <= 0.0) {
        tol = default_minimize_tolerance(lo, hi);
    }

    ScalarMinimum result;
    auto eval = [&](double x) {
        const double fx = f(x);
        ++result.evaluations;
        if (!std::isfinite(fx)) {
            std::ostringstream os;
            os.precision(17);
            os << "minimize_scalar: objective is not finite at x = " << x;
            throw NumericalError(os.str());
        }
        return fx;
    };

    if (lo == hi) {
        result.argmin = lo;
        result.value = eval(lo);
        result.at_lower = true;
        result.at_upper = true;
        return result;
    }

    constexpr int cells = kMinimizeGridPoints - 1;
    const double step = (hi - lo) / cells;
    auto grid = [&](int i) { return i == cells ? hi : lo + step * i; };

    int best = 0;
    double best_value = eval(lo);
    for (int i = 1; i <= cells; ++i) {
        const double fx = eval(grid(i));
        if (fx < best_value) {
            best_value = fx;
            best = i;
        }
    }

    double a = grid(best > 0 ? best - 1 : 0);
    double b = grid(best < cells ? best + 1 : cells);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    for (int it = 0; it < 500 && b - a > tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    const double mid = 0.5 * (a + b);
    const double fmid = eval(mid);

    result.argmin = grid(best);
    result.value = best_value;
    if (fmid < result.value) {
        result.argmin = mid;
        result.value = fmid;
    }
    if (fc < result.value) {
        result.argmin = c;
        result.value = fc;
    }
    if (fd < result.value) {
        result.argmin = d;
        result.value = fd;
    }
    result.at_lower = result.argmin - lo <= tol;
    result.at_upper = hi - result.argmin <= tol;
    return result;
}

}  // namespace parnoise
