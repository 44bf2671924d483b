#include "parnoise/estimators.hpp"

#include "parnoise/errors.hpp"
#include "parnoise/optimize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace parnoise {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CheckedSolve {
    Eigen::VectorXd x;
    double condition = 0.0;
    bool singular = false;
};

CheckedSolve solve_checked(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double max_condition) {
    CheckedSolve out;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double rcond = lu.rcond();
    out.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(out.condition <= max_condition)) {
        out.singular = true;
        out.x = Eigen::VectorXd::Constant(b.size(), kNaN);
        return out;
    }
    out.x = lu.solve(b);
    if (!out.x.allFinite()) {
        out.singular = true;
        out.x = Eigen::VectorXd::Constant(b.size(), kNaN);
    }
    return out;
}

int resolved_s(int order, const EstimatorOptions& options) {
    const int s = options.high_order_count == 0 ? order : options.high_order_count;
    if (s < order) {
        throw std::invalid_argument("high_order_count s must be >= order p");
    }
    return s;
}

EstimationResult make_result(Method method, const AcvfTable& table, int order) {
    if (order < 1) {
        throw std::invalid_argument("order must be >= 1");
    }
    EstimationResult r;
    r.method = method;
    r.order = order;
    r.period = table.period();
    r.phi_hat = Eigen::MatrixXd::Constant(table.period(), order, kNaN);
    r.sigma_xi2_by_season.assign(static_cast<std::size_t>(table.period()), kNaN);
    if (estimates_noise_variance(method)) {
        r.sigma_z2_by_season.assign(static_cast<std::size_t>(table.period()), kNaN);
    }
    r.diagnostics.resize(static_cast<std::size_t>(table.period()));
    return r;
}

// Means over seasons whose variance estimates are usable.
void finalize(EstimationResult& r) {
    std::size_t failed = 0;
    double xi_sum = 0.0;
    double z_sum = 0.0;
    std::size_t used = 0;
    for (std::size_t v = 0; v < r.diagnostics.size(); ++v) {
        SeasonDiagnostics& d = r.diagnostics[v];
        if (d.singular) {
            d.excluded_from_variance = true;
            ++failed;
            continue;
        }
        if (d.excluded_from_variance) {
            continue;
        }
        xi_sum += r.sigma_xi2_by_season[v];
        if (!r.sigma_z2_by_season.empty()) {
            z_sum += r.sigma_z2_by_season[v];
        }
        ++used;
    }
    if (failed == r.diagnostics.size()) {
        throw NumericalError(to_string(r.method) + ": linear systems are singular in every season");
    }
    r.sigma_xi2_hat = used > 0 ? xi_sum / static_cast<double>(used) : kNaN;
    if (estimates_noise_variance(r.method)) {
        r.sigma_z2_hat = used > 0 ? z_sum / static_cast<double>(used) : kNaN;
    }
}

void require_lag(const AcvfTable& table, int needed) {
    if (table.max_lag() < needed) {
        throw std::invalid_argument("ACVF table max_lag " + std::to_string(table.max_lag()) +
                                    " is too small, need " + std::to_string(needed));
    }
}

// Coefficients and innovation variance from the low-order equations at a given noise variance.
void low_order_finish(EstimationResult& r, const YwSystem& sys, double sigma, const EstimatorOptions& options) {
    const std::size_t v = static_cast<std::size_t>(sys.season - 1);
    SeasonDiagnostics& diag = r.diagnostics[v];
    const Eigen::MatrixXd shifted =
        sys.low_matrix - sigma * Eigen::MatrixXd::Identity(sys.low_matrix.rows(), sys.low_matrix.cols());
    const CheckedSolve solve = solve_checked(shifted, sys.low_vector, options.singular_condition);
    diag.condition_number = solve.condition;
    if (solve.singular) {
        diag.singular = true;
        diag.note = "low-order system is singular";
        return;
    }
    r.phi_hat.row(static_cast<Eigen::Index>(v)) = solve.x.transpose();
    r.sigma_z2_by_season[v] = sigma;
    r.sigma_xi2_by_season[v] = sys.lag0 - solve.x.dot(sys.low_vector) - sigma;
}

}  // namespace

std::string to_string(Method method) {
    switch (method) {
        case Method::M1: return "M1";
        case Method::M2: return "M2";
        case Method::M3: return "M3";
        case Method::M4: return "M4";
        case Method::M5: return "M5";
    }
    return "?";
}

Method parse_method(const std::string& text) {
    std::string up = text;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "M1") return Method::M1;
    if (up == "M2") return Method::M2;
    if (up == "M3") return Method::M3;
    if (up == "M4") return Method::M4;
    if (up == "M5") return Method::M5;
    throw std::invalid_argument("unknown method '" + text + "', expected one of M1..M5");
}

bool estimates_noise_variance(Method method) noexcept { return method != Method::M5; }

bool EstimationResult::coefficients_ok() const { return phi_hat.allFinite(); }

ParModel EstimationResult::fitted_model() const {
    ParModel m{order, period, phi_hat, sigma_xi2_hat};
    validate(m);
    return m;
}

EstimationResult EstimationResult::clamped() const {
    EstimationResult out = *this;
    auto clamp = [](double x) { return std::isnan(x) ? x : std::max(0.0, x); };
    out.sigma_xi2_hat = clamp(out.sigma_xi2_hat);
    if (out.sigma_z2_hat) {
        out.sigma_z2_hat = clamp(*out.sigma_z2_hat);
    }
    for (double& x : out.sigma_xi2_by_season) x = clamp(x);
    for (double& x : out.sigma_z2_by_season) x = clamp(x);
    return out;
}

int required_max_lag(Method method, int order, const EstimatorOptions& options) {
    switch (method) {
        case Method::M1: return 2 * order;
        case Method::M5: return order;
        default: return order + resolved_s(order, options);
    }
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

Eigen::VectorXd noise_adjusted_coefficients(const YwSystem& sys, double sigma) {
    const Eigen::MatrixXd shifted =
        sys.low_matrix - sigma * Eigen::MatrixXd::Identity(sys.low_matrix.rows(), sys.low_matrix.cols());
    return shifted.partialPivLu().solve(sys.low_vector);
}

double high_order_cost(const YwSystem& sys, double sigma) {
    const Eigen::VectorXd phi = noise_adjusted_coefficients(sys, sigma);
    return (sys.high_matrix * phi - sys.high_vector).squaredNorm();
}

double m4_init_function(const YwSystem& sys, double d) {
    return sys.lag0 - d - sys.low_vector.dot(noise_adjusted_coefficients(sys, d));
}

Eigen::VectorXd m4_coefficient_update(const YwSystem& sys, double sigma) {
    const Eigen::MatrixXd shifted =
        sys.low_matrix - sigma * Eigen::MatrixXd::Identity(sys.low_matrix.rows(), sys.low_matrix.cols());
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
    const Eigen::VectorXd unconstrained = lu.solve(sys.low_vector);
    const Eigen::VectorXd g = sys.high_matrix.row(0).transpose();
    const Eigen::VectorXd w = lu.solve(lu.solve(g));  // (R^2)^{-1} g
    const double violation = g.dot(unconstrained) - sys.high_vector(0);
    return unconstrained - (violation / g.dot(w)) * w;
}

double m4_variance_update(const YwSystem& sys, const Eigen::VectorXd& phi) {
    return phi.dot(sys.low_matrix * phi - sys.low_vector) / phi.squaredNorm();
}

EstimationResult estimate_m5(const AcvfTable& table, int order, const EstimatorOptions& options) {
    EstimationResult r = make_result(Method::M5, table, order);
    require_lag(table, order);
    for (const YwSystem& sys : build_systems(table, order, 0)) {
        const std::size_t v = static_cast<std::size_t>(sys.season - 1);
        SeasonDiagnostics& diag = r.diagnostics[v];
        const CheckedSolve solve = solve_checked(sys.low_matrix, sys.low_vector, options.singular_condition);
        diag.condition_number = solve.condition;
        if (solve.singular) {
            diag.singular = true;
            diag.note = "low-order system is singular";
            continue;
        }
        r.phi_hat.row(static_cast<Eigen::Index>(v)) = solve.x.transpose();
        r.sigma_xi2_by_season[v] = sys.lag0 - sys.low_vector.dot(solve.x);
    }
    finalize(r);
    return r;
}

EstimationResult estimate_m1(const AcvfTable& table, int order, const EstimatorOptions& options) {
    EstimationResult r = make_result(Method::M1, table, order);
    require_lag(table, 2 * order);
    for (const YwSystem& sys : build_systems(table, order, order)) {
        const std::size_t v = static_cast<std::size_t>(sys.season - 1);
        SeasonDiagnostics& diag = r.diagnostics[v];
        const CheckedSolve solve = solve_checked(sys.high_matrix, sys.high_vector, options.singular_condition);
        diag.condition_number = solve.condition;
        if (solve.singular) {
            diag.singular = true;
            diag.note = "high-order system is singular";
            continue;
        }
        const Eigen::VectorXd& phi = solve.x;
        r.phi_hat.row(static_cast<Eigen::Index>(v)) = phi.transpose();
        if (std::abs(phi(0)) < options.phi1_guard) {
            diag.excluded_from_variance = true;
            diag.note = "|phi_1| below guard, noise variance undefined";
            continue;
        }
        // First low-order equation: gamma(v,1) - Gamma_{v,1} Phi = -sigma_Z^2 phi_1
        const double first_row = sys.low_matrix.row(0).dot(phi);
        const double sigma_z2 = (first_row - sys.low_vector(0)) / phi(0);
        r.sigma_z2_by_season[v] = sigma_z2;
        r.sigma_xi2_by_season[v] = sys.lag0 - sys.low_vector.dot(phi) - sigma_z2;
    }
    finalize(r);
    return r;
}

EstimationResult estimate_m2(const AcvfTable& table, int order, const EstimatorOptions& options) {
    EstimationResult r = make_result(Method::M2, table, order);
    const int s = resolved_s(order, options);
    require_lag(table, order + s);
    for (const YwSystem& sys : build_systems(table, order, s)) {
        SeasonDiagnostics& diag = r.diagnostics[static_cast<std::size_t>(sys.season - 1)];
        const double upper = min_eigenvalue(sys.augmented);
        double sigma = 0.0;
        if (!(upper > 0.0)) {
            diag.degenerate_interval = true;
            diag.note = "augmented covariance not positive-definite";
        } else {
            try {
                const ScalarMinimum best =
                    minimize_scalar([&sys](double x) { return high_order_cost(sys, x); }, 0.0, upper);
                sigma = best.argmin;
                diag.iterations = best.evaluations;
                diag.boundary = best.at_upper;
            } catch (const NumericalError& e) {
                diag.singular = true;
                diag.note = e.what();
                continue;
            }
        }
        low_order_finish(r, sys, sigma, options);
    }
    finalize(r);
    return r;
}

EstimationResult estimate_m3(const AcvfTable& table, int order, const EstimatorOptions& options) {
    EstimationResult r = make_result(Method::M3, table, order);
    const int s = resolved_s(order, options);
    require_lag(table, order + s);
    const std::vector<YwSystem> systems = build_systems(table, order, s);

    double zeta = std::numeric_limits<double>::infinity();
    for (const YwSystem& sys : systems) {
        zeta = std::min(zeta, min_eigenvalue(sys.augmented));
    }
    double sigma = 0.0;
    bool boundary = false;
    int evaluations = 0;
    if (!(zeta > 0.0)) {
        for (SeasonDiagnostics& d : r.diagnostics) {
            d.degenerate_interval = true;
            d.note = "augmented covariance not positive-definite";
        }
    } else {
        auto total = [&systems](double x) {
            double sum = 0.0;
            for (const YwSystem& sys : systems) {
                sum += high_order_cost(sys, x);
            }
            return sum;
        };
        const ScalarMinimum best = minimize_scalar(total, 0.0, zeta);
        sigma = best.argmin;
        boundary = best.at_upper;
        evaluations = best.evaluations;
    }
    for (const YwSystem& sys : systems) {
        SeasonDiagnostics& diag = r.diagnostics[static_cast<std::size_t>(sys.season - 1)];
        diag.boundary = boundary;
        diag.iterations = evaluations;
        low_order_finish(r, sys, sigma, options);
    }
    finalize(r);
    return r;
}

EstimationResult estimate_m4(const AcvfTable& table, int order, const EstimatorOptions& options) {
    EstimationResult r = make_result(Method::M4, table, order);
    const int s = resolved_s(order, options);
    require_lag(table, order + s);
    const int p = order;

    for (const YwSystem& sys : build_systems(table, order, s)) {
        const std::size_t v = static_cast<std::size_t>(sys.season - 1);
        SeasonDiagnostics& diag = r.diagnostics[v];

        // Initial noise variance by bisection on f(D).
        double lo = 0.0;
        double hi = options.init_upper_fraction * min_eigenvalue(sys.low_matrix);
        double sigma = 0.0;
        if (!(hi > 0.0)) {
            diag.degenerate_interval = true;
            diag.note = "low-order covariance not positive-definite";
        } else {
            bool found = false;
            double best_abs = std::numeric_limits<double>::infinity();
            double best_d = 0.0;
            for (int halving = 0; halving < 100; ++halving) {
                const double d = 0.5 * (lo + hi);
                const double f = m4_init_function(sys, d);
                if (std::abs(f) < best_abs) {
                    best_abs = std::abs(f);
                    best_d = d;
                }
                if (std::abs(f) <= options.delta0) {
                    sigma = d;
                    found = true;
                    break;
                }
                if (f > 0.0) {
                    lo = d;
                } else {
                    hi = d;
                }
            }
            if (!found) {
                sigma = best_d;
                diag.bisection_failed = true;
            }
        }

        // Alternating updates of Phi and sigma_Z^2.
        Eigen::VectorXd phi = m4_coefficient_update(sys, sigma);
        diag.converged = false;
        bool broken = false;
        for (int it = 1; it <= options.max_iter; ++it) {
            if (!phi.allFinite() || phi.squaredNorm() == 0.0) {
                broken = true;
                break;
            }
            const double next = m4_variance_update(sys, phi);
            diag.iterations = it;
            const double change = std::abs(next - sigma);
            const double previous = sigma;
            sigma = next;
            if (!std::isfinite(sigma)) {
                broken = true;
                break;
            }
            const bool small = previous != 0.0 ? change / std::abs(previous) <= options.delta : change == 0.0;
            if (small) {
                diag.converged = true;
                break;
            }
            phi = m4_coefficient_update(sys, sigma);
        }
        if (broken) {
            diag.singular = true;
            diag.note = "alternating update produced a zero or non-finite iterate";
            continue;
        }
        if (!diag.converged) {
            diag.note = "alternation reached max_iter";
        }

        // Stacked low- and high-order equations, least squares through the normal equations.
        Eigen::MatrixXd h(p + s, p);
        h.topRows(p) = sys.low_matrix - sigma * Eigen::MatrixXd::Identity(p, p);
        h.bottomRows(s) = sys.high_matrix;
        Eigen::VectorXd rhs(p + s);
        rhs.head(p) = sys.low_vector;
        rhs.tail(s) = sys.high_vector;
        const Eigen::MatrixXd normal = h.transpose() * h;
        CheckedSolve solve = solve_checked(normal, h.transpose() * rhs, options.singular_condition);
        diag.condition_number = solve.condition;
        if (solve.singular) {
            const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h);
            if (qr.rank() < p) {
                diag.singular = true;
                diag.note = "stacked system is rank deficient";
                continue;
            }
            solve.x = qr.solve(rhs);
            diag.note += diag.note.empty() ? "QR fallback" : "; QR fallback";
        }
        r.phi_hat.row(static_cast<Eigen::Index>(v)) = solve.x.transpose();
        r.sigma_z2_by_season[v] = sigma;
        r.sigma_xi2_by_season[v] = sys.lag0 - solve.x.dot(sys.low_vector) - sigma;
    }
    finalize(r);
    return r;
}

EstimationResult estimate(Method method, const AcvfTable& table, int order, const EstimatorOptions& options) {
    switch (method) {
        case Method::M1: return estimate_m1(table, order, options);
        case Method::M2: return estimate_m2(table, order, options);
        case Method::M3: return estimate_m3(table, order, options);
        case Method::M4: return estimate_m4(table, order, options);
        case Method::M5: return estimate_m5(table, order, options);
    }
    throw std::invalid_argument("unknown method");
}

}  // namespace parnoise
