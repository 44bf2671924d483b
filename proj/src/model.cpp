#include "parnoise/model.hpp"

#include <cmath>
#include <sstream>

namespace parnoise {

int normalize_season(long long season, int period) {
    if (period <= 0) {
        throw std::invalid_argument("period must be positive, got " + std::to_string(period));
    }
    long long r = (season - 1) % period;
    if (r < 0) {
        r += period;
    }
    return static_cast<int>(r) + 1;
}

double ParModel::coefficient(long long season, int lag) const {
    return phi(normalize_season(season, period) - 1, lag - 1);
}

void validate(const ParModel& model) {
    if (model.order < 1) {
        throw std::invalid_argument("order: must be >= 1, got " + std::to_string(model.order));
    }
    if (model.period < 1) {
        throw std::invalid_argument("period: must be >= 1, got " + std::to_string(model.period));
    }
    if (model.phi.rows() != model.period || model.phi.cols() != model.order) {
        std::ostringstream os;
        os << "phi: dimension mismatch, expected " << model.period << "x" << model.order
           << " (period x order), got " << model.phi.rows() << "x" << model.phi.cols();
        throw std::invalid_argument(os.str());
    }
    for (int v = 0; v < model.period; ++v) {
        for (int i = 0; i < model.order; ++i) {
            if (!std::isfinite(model.phi(v, i))) {
                std::ostringstream os;
                os << "phi: non-finite entry at season " << v + 1 << ", lag " << i + 1;
                throw std::invalid_argument(os.str());
            }
        }
    }
    if (!std::isfinite(model.sigma_xi2)) {
        throw std::invalid_argument("sigma_xi2: non-finite innovation variance");
    }
    if (model.sigma_xi2 <= 0.0) {
        throw std::invalid_argument("sigma_xi2: non-positive innovation variance");
    }
}

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void check_probability(double q) {
    if (!std::isfinite(q) || q < 0.0 || 2.0 * q > 1.0) {
        throw std::invalid_argument("prob_each: must satisfy 0 <= 2q <= 1, got " + std::to_string(q));
    }
}

void check_variance(double v) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw std::invalid_argument("variance: must be positive and finite, got " + std::to_string(v));
    }
}

}  // namespace

void validate(const NoiseModel& noise) {
    std::visit(Overloaded{
                   [](const NoNoise&) {},
                   [](const GaussianNoise& n) { check_variance(n.variance); },
                   [](const TwoPointOutliers& n) {
                       if (!std::isfinite(n.magnitude)) {
                           throw std::invalid_argument("magnitude: non-finite");
                       }
                       check_probability(n.prob_each);
                   },
                   [](const MixtureNoise& n) {
                       check_variance(n.gauss_variance);
                       if (!std::isfinite(n.magnitude)) {
                           throw std::invalid_argument("magnitude: non-finite");
                       }
                       check_probability(n.prob_each);
                   },
               },
               noise);
}

double noise_variance(const NoiseModel& noise) {
    return std::visit(Overloaded{
                          [](const NoNoise&) { return 0.0; },
                          [](const GaussianNoise& n) { return n.variance; },
                          [](const TwoPointOutliers& n) { return 2.0 * n.prob_each * n.magnitude * n.magnitude; },
                          [](const MixtureNoise& n) {
                              return n.gauss_variance + 2.0 * n.prob_each * n.magnitude * n.magnitude;
                          },
                      },
                      noise);
}

NoiseModel scale_noise(const NoiseModel& noise, double beta) {
    if (!std::isfinite(beta) || beta < 0.0) {
        throw std::invalid_argument("beta: must be a nonnegative finite scale, got " + std::to_string(beta));
    }
    if (beta == 0.0) {
        return NoNoise{};
    }
    return std::visit(Overloaded{
                          [](const NoNoise&) -> NoiseModel { return NoNoise{}; },
                          [beta](const GaussianNoise& n) -> NoiseModel {
                              return GaussianNoise{beta * beta * n.variance};
                          },
                          [beta](const TwoPointOutliers& n) -> NoiseModel {
                              return TwoPointOutliers{beta * n.magnitude, n.prob_each};
                          },
                          [beta](const MixtureNoise& n) -> NoiseModel {
                              return MixtureNoise{beta * beta * n.gauss_variance, beta * n.magnitude, n.prob_each};
                          },
                      },
                      noise);
}

std::string describe(const NoiseModel& noise) {
    std::ostringstream os;
    os.precision(17);
    std::visit(Overloaded{
                   [&](const NoNoise&) { os << "none"; },
                   [&](const GaussianNoise& n) { os << "gaussian(variance=" << n.variance << ")"; },
                   [&](const TwoPointOutliers& n) {
                       os << "outliers(magnitude=" << n.magnitude << ", prob_each=" << n.prob_each << ")";
                   },
                   [&](const MixtureNoise& n) {
                       os << "mixture(gauss_variance=" << n.gauss_variance << ", magnitude=" << n.magnitude
                          << ", prob_each=" << n.prob_each << ")";
                   },
               },
               noise);
    return os.str();
}

LiftedSystem lift(const ParModel& model) {
    validate(model);
    const int p = model.order;
    const int T = model.period;
    const int cycles = (p + T - 1) / T;
    const int d = cycles * T;

    // Row v-1 expresses X_{(n+1)T+v} over the basis [S_n, xi_1..xi_T].
    Eigen::MatrixXd fresh = Eigen::MatrixXd::Zero(T, d + T);
    for (int v = 1; v <= T; ++v) {
        fresh(v - 1, d + v - 1) = 1.0;
        for (int i = 1; i <= p; ++i) {
            const double c = model.coefficient(v, i);
            if (v - i >= 1) {
                fresh.row(v - 1) += c * fresh.row(v - i - 1);
            } else {
                fresh(v - 1, i - v) += c;
            }
        }
    }

    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(d, d + T);
    for (int a = 0; a < d; ++a) {
        if (a < T) {
            next.row(a) = fresh.row(T - a - 1);
        } else {
            next(a, a - T) = 1.0;
        }
    }

    LiftedSystem sys;
    sys.dimension = d;
    sys.transition = next.leftCols(d);
    sys.input = next.rightCols(T);
    return sys;
}

StabilityReport is_causal(const ParModel& model) {
    const LiftedSystem sys = lift(model);
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(sys.transition, false);
    double radius = 0.0;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        radius = std::max(radius, std::abs(solver.eigenvalues()(k)));
    }
    return {radius < 1.0 - kStabilityMargin, radius};
}

}  // namespace parnoise
