#include "catch_amalgamated.hpp"

#include "parnoise/errors.hpp"
#include "parnoise/optimize.hpp"

#include <cmath>
#include <limits>

using namespace parnoise;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

TEST_CASE("parabola minimum", "[optimize]") {
    const ScalarMinimum m = minimize_scalar([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0);
    CHECK_THAT(m.argmin, WithinAbs(0.3, default_minimize_tolerance(0.0, 1.0)));
    CHECK_FALSE(m.at_lower);
    CHECK_FALSE(m.at_upper);
    CHECK(m.evaluations > kMinimizeGridPoints);
}

TEST_CASE("minimum between grid points", "[optimize]") {
    const double target = 0.123456789;
    const ScalarMinimum m = minimize_scalar([&](double x) { return std::cosh(x - target); }, -2.0, 3.0);
    CHECK_THAT(m.argmin, WithinAbs(target, 1e-6));
    const ScalarMinimum q = minimize_scalar([&](double x) { return std::abs(x - target); }, -2.0, 3.0);
    CHECK_THAT(q.argmin, WithinAbs(target, default_minimize_tolerance(-2.0, 3.0)));
}

TEST_CASE("monotone functions end at an endpoint", "[optimize]") {
    const ScalarMinimum up = minimize_scalar([](double x) { return x; }, 0.0, 1.0);
    CHECK(up.argmin == 0.0);
    CHECK(up.at_lower);
    const ScalarMinimum down = minimize_scalar([](double x) { return -std::exp(x); }, 0.0, 1.0);
    CHECK(down.argmin == 1.0);
    CHECK(down.at_upper);
}

TEST_CASE("degenerate interval evaluates once", "[optimize]") {
    const ScalarMinimum m = minimize_scalar([](double x) { return x * x; }, 0.5, 0.5);
    CHECK(m.argmin == 0.5);
    CHECK(m.value == 0.25);
    CHECK(m.evaluations == 1);
}

TEST_CASE("custom tolerance", "[optimize]") {
    const ScalarMinimum coarse = minimize_scalar([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-4);
    const ScalarMinimum fine = minimize_scalar([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-12);
    CHECK_THAT(coarse.argmin, WithinAbs(0.3, 1e-4));
    CHECK(coarse.evaluations < fine.evaluations);
}

TEST_CASE("non-finite objective names the abscissa", "[optimize]") {
    auto f = [](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x; };
    CHECK_THROWS_AS(minimize_scalar(f, 0.0, 1.0), NumericalError);
    CHECK_THROWS_WITH(minimize_scalar(f, 0.0, 1.0), ContainsSubstring("x = 0.505"));
    CHECK_THROWS_AS(minimize_scalar([](double x) { return x; }, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("minimization is deterministic", "[optimize]") {
    auto f = [](double x) { return std::sin(7.0 * x) + 0.1 * x * x; };
    const ScalarMinimum a = minimize_scalar(f, -3.0, 3.0);
    const ScalarMinimum b = minimize_scalar(f, -3.0, 3.0);
    CHECK(a.argmin == b.argmin);
    CHECK(a.value == b.value);
}
