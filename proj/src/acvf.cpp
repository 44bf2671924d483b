#include "parnoise/acvf.hpp"

#include "parnoise/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace parnoise {

namespace {

long long floor_div(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

long long ceil_div(long long a, long long b) { return -floor_div(-a, b); }

}  // namespace

AcvfTable::AcvfTable(int period, int max_lag, AcvfSource source, std::size_t n_cycles)
    : period_(period), max_lag_(max_lag), source_(source), n_cycles_(n_cycles) {
    if (period < 1) {
        throw std::invalid_argument("AcvfTable: period must be >= 1");
    }
    if (max_lag < 0) {
        throw std::invalid_argument("AcvfTable: max_lag must be >= 0");
    }
    values_.assign(static_cast<std::size_t>(period) * static_cast<std::size_t>(2 * max_lag + 1), 0.0);
}

std::size_t AcvfTable::index(long long season, int lag) const {
    if (lag < -max_lag_ || lag > max_lag_) {
        throw std::out_of_range("AcvfTable: lag " + std::to_string(lag) + " outside +-" + std::to_string(max_lag_));
    }
    const int w = normalize_season(season, period_);
    return static_cast<std::size_t>(w - 1) * static_cast<std::size_t>(2 * max_lag_ + 1) +
           static_cast<std::size_t>(lag + max_lag_);
}

double AcvfTable::operator()(long long season, int lag) const { return values_[index(season, lag)]; }

void AcvfTable::set(long long season, int lag, double value) { values_[index(season, lag)] = value; }

AcvfTable AcvfTable::scaled(double c) const {
    AcvfTable out = *this;
    for (double& v : out.values_) {
        v *= c;
    }
    return out;
}

AcvfEstimate empirical_acvf_checked(const Trajectory& y, long long season, long long lag) {
    const long long T = y.period;
    const long long len = static_cast<long long>(y.values.size());
    if (len == 0) {
        throw std::invalid_argument("empirical_acvf: empty trajectory");
    }
    if (lag > len - 1 || lag < -(len - 1)) {
        throw std::invalid_argument("empirical_acvf: |lag| must be <= length - 1");
    }
    const long long N = static_cast<long long>(y.n_cycles);
    const long long w = normalize_season(season, y.period);
    const long long l = std::max(ceil_div(1 - w, T), ceil_div(1 - (w - lag), T));
    const long long r = std::min(floor_div(N * T - w, T), floor_div(N * T - (w - lag), T));
    if (r < l) {
        return {0.0, true};
    }
    double sum = 0.0;
    for (long long n = l; n <= r; ++n) {
        const long long t = n * T + w;
        sum += y.values[static_cast<std::size_t>(t - 1)] * y.values[static_cast<std::size_t>(t - lag - 1)];
    }
    return {sum / static_cast<double>(N), false};
}

double empirical_acvf(const Trajectory& y, long long season, long long lag) {
    return empirical_acvf_checked(y, season, lag).value;
}

AcvfTable acvf_table(const Trajectory& y, int max_lag) {
    validate(y);
    if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= y.values.size()) {
        throw std::invalid_argument("acvf_table: max_lag must be in [0, length), got " + std::to_string(max_lag));
    }
    AcvfTable table(y.period, max_lag, AcvfSource::Empirical, y.n_cycles);
    for (int w = 1; w <= y.period; ++w) {
        for (int k = -max_lag; k <= max_lag; ++k) {
            table.set(w, k, empirical_acvf(y, w, k));
        }
    }
    return table;
}

AcvfTable theoretical_acvf(const ParModel& model, double sigma_z2, int max_lag) {
    if (!std::isfinite(sigma_z2) || sigma_z2 < 0.0) {
        throw std::invalid_argument("theoretical_acvf: sigma_z2 must be nonnegative");
    }
    if (max_lag < 0) {
        throw std::invalid_argument("theoretical_acvf: max_lag must be nonnegative");
    }
    const StabilityReport stability = is_causal(model);
    if (!stability.causal) {
        throw std::invalid_argument("theoretical_acvf: model is not causal (spectral radius " +
                                    std::to_string(stability.spectral_radius) + ")");
    }
    const LiftedSystem sys = lift(model);
    const Eigen::MatrixXd& A = sys.transition;
    const Eigen::MatrixXd Q = model.sigma_xi2 * sys.input * sys.input.transpose();

    Eigen::MatrixXd sigma = Q;
    bool converged = false;
    for (long it = 0; it < kLyapunovMaxIterations; ++it) {
        Eigen::MatrixXd next = A * sigma * A.transpose() + Q;
        const double change = (next - sigma).cwiseAbs().maxCoeff();
        const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
        sigma = std::move(next);
        if (change <= kLyapunovTolerance * scale) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NumericalError("theoretical_acvf: Lyapunov iteration did not converge");
    }
    sigma = 0.5 * (sigma + sigma.transpose());

    const int T = model.period;
    const int d = sys.dimension;
    // cross[j] = Cov(S_n, S_{n-j}) = A^j Sigma
    std::vector<Eigen::MatrixXd> cross{sigma};
    auto lagged = [&](int j) -> const Eigen::MatrixXd& {
        while (static_cast<int>(cross.size()) <= j) {
            cross.push_back(A * cross.back());
        }
        return cross[static_cast<std::size_t>(j)];
    };

    AcvfTable table(T, max_lag, AcvfSource::Theoretical);
    // Reference cycle n = 0: S_0[a] = X_{T-a}.
    for (int w = 1; w <= T; ++w) {
        for (int k = 0; k <= max_lag; ++k) {
            const long long u = w - k;
            const long long j = std::max(0LL, ceil_div(T - d + 1 - u, T));
            const long long a = T - w;
            const long long b = -j * T + T - u;
            table.set(w, k, lagged(static_cast<int>(j))(a, b));
        }
    }
    // gamma(w, -k) = gamma(w + k, k)
    for (int w = 1; w <= T; ++w) {
        for (int k = 1; k <= max_lag; ++k) {
            table.set(w, -k, table(w + k, k));
        }
    }
    for (int w = 1; w <= T; ++w) {
        table.set(w, 0, table(w, 0) + sigma_z2);
    }
    return table;
}

YwSystem build_system(const AcvfTable& table, int season, int order, int high_order_count) {
    const int p = order;
    const int s = high_order_count;
    if (p < 1 || s < 0) {
        throw std::invalid_argument("build_system: need order >= 1 and high_order_count >= 0");
    }
    if (table.max_lag() < p + s) {
        throw std::invalid_argument("build_system: table max_lag " + std::to_string(table.max_lag()) +
                                    " is below order + high_order_count = " + std::to_string(p + s));
    }
    const long long v = normalize_season(season, table.period());
    YwSystem sys;
    sys.season = static_cast<int>(v);
    sys.lag0 = table(v, 0);
    sys.low_matrix.resize(p, p);
    sys.low_vector.resize(p);
    for (int i = 1; i <= p; ++i) {
        for (int j = 1; j <= p; ++j) {
            sys.low_matrix(i - 1, j - 1) = table(v - i, j - i);
        }
        sys.low_vector(i - 1) = table(v, i);
    }
    sys.high_matrix.resize(s, p);
    sys.high_vector.resize(s);
    for (int i = 1; i <= s; ++i) {
        for (int j = 1; j <= p; ++j) {
            sys.high_matrix(i - 1, j - 1) = table(v - j, p + i - j);
        }
        sys.high_vector(i - 1) = table(v, p + i);
    }
    sys.augmented.resize(p + 1, p + 1);
    sys.augmented(0, 0) = sys.lag0;
    sys.augmented.block(0, 1, 1, p) = sys.low_vector.transpose();
    sys.augmented.block(1, 0, p, 1) = sys.low_vector;
    sys.augmented.block(1, 1, p, p) = sys.low_matrix;
    return sys;
}

std::vector<YwSystem> build_systems(const AcvfTable& table, int order, int high_order_count) {
    std::vector<YwSystem> out;
    out.reserve(static_cast<std::size_t>(table.period()));
    for (int v = 1; v <= table.period(); ++v) {
        out.push_back(build_system(table, v, order, high_order_count));
    }
    return out;
}

}  // namespace parnoise
