// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.
// --smoke shrinks the test-size experiment to 100 datasets.

#include "parnoise/acvf.hpp"
#include "parnoise/estimators.hpp"
#include "parnoise/experiments.hpp"
#include "parnoise/parallel.hpp"
#include "parnoise/rng.hpp"
#include "parnoise/testing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace parnoise;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << "  C" << id << "  " << title << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
}

double phi_error(const EstimationResult& r, const ParModel& m) {
    return (r.phi_hat - m.phi).cwiseAbs().maxCoeff();
}

double variance_error(const EstimationResult& r, double sz) {
    return std::max(std::abs(*r.sigma_z2_hat - sz), std::abs(r.sigma_xi2_hat - 1.0));
}

// 1 -------------------------------------------------------------------------

Outcome oracle_suite() {
    const auto start = Clock::now();
    EstimatorOptions tight;
    tight.delta0 = 1e-12;
    tight.delta = 1e-12;
    tight.max_iter = 100000;
    EstimatorOptions scaled = tight;
    scaled.delta0 = 1e-6;
    scaled.delta = 1e-6;

    double worst_m13 = 0.0;
    double worst_m4_tight = 0.0;
    double worst_m4_scaled = 0.0;
    double worst_m5_clean = 0.0;
    double least_m5_noisy = INFINITY;
    bool ok = true;
    for (double phi21 : {-0.8, -0.1}) {
        const ParModel m = study_model(phi21);
        for (double sz : {0.0, 0.2, 0.8}) {
            const AcvfTable t = theoretical_acvf(m, sz, 6);
            for (Method method : {Method::M1, Method::M2, Method::M3}) {
                const EstimationResult r = estimate(method, t, 2);
                worst_m13 = std::max({worst_m13, phi_error(r, m), variance_error(r, sz)});
            }
            const EstimationResult r4 = estimate(Method::M4, t, 2, tight);
            worst_m4_tight = std::max({worst_m4_tight, phi_error(r4, m), variance_error(r4, sz)});
            const EstimationResult r4s = estimate(Method::M4, t, 2, scaled);
            worst_m4_scaled = std::max({worst_m4_scaled, phi_error(r4s, m), variance_error(r4s, sz)});
            const double e5 = phi_error(estimate(Method::M5, t, 2), m);
            if (sz == 0.0) {
                worst_m5_clean = std::max(worst_m5_clean, e5);
            } else {
                least_m5_noisy = std::min(least_m5_noisy, e5);
            }
        }
    }
    const double elapsed = seconds_since(start);
    ok = worst_m13 <= 1e-6 && worst_m4_tight <= 1e-6 && worst_m4_scaled <= 1e-3 && worst_m5_clean <= 1e-10 &&
         least_m5_noisy > 1e-10 && elapsed < 5.0;
    return {ok, "M1-M3 max error " + fmt(worst_m13) + ", M4 (delta=1e-12) " + fmt(worst_m4_tight) +
                    ", M4 (delta=1e-6) " + fmt(worst_m4_scaled) + ", M5 clean " + fmt(worst_m5_clean) +
                    ", M5 noisy min " + fmt(least_m5_noisy) + ", " + fmt(elapsed) + " s"};
}

// 2 -------------------------------------------------------------------------

double direct_acvf(const std::vector<double>& y, int T, int w, int k) {
    const int len = static_cast<int>(y.size());
    double sum = 0.0;
    for (int t = 1; t <= len; ++t) {
        if ((t - w) % T != 0 || t - k < 1 || t - k > len) {
            continue;
        }
        sum += y[static_cast<std::size_t>(t - 1)] * y[static_cast<std::size_t>(t - k - 1)];
    }
    return sum / static_cast<double>(len / T);
}

Outcome acvf_equivalence() {
    const auto start = Clock::now();
    Engine rng = make_engine(derive_seed(2, Stream::Trial));
    std::uniform_int_distribution<int> period_dist(1, 5);
    std::normal_distribution<double> normal(0.0, 1.0);
    long compared = 0;
    long mismatches = 0;
    for (int s = 0; s < 1000; ++s) {
        const int T = period_dist(rng);
        std::uniform_int_distribution<int> cycles_dist(1, 30 / T);
        Trajectory y;
        y.period = T;
        y.n_cycles = static_cast<std::size_t>(cycles_dist(rng));
        for (std::size_t i = 0; i < y.n_cycles * static_cast<std::size_t>(T); ++i) {
            y.values.push_back(normal(rng));
        }
        const int len = static_cast<int>(y.size());
        for (int w = 1; w <= T; ++w) {
            for (int k = -(len - 1); k <= len - 1; ++k) {
                const double a = empirical_acvf(y, w, k);
                const double b = direct_acvf(y.values, T, w, k);
                ++compared;
                if (std::memcmp(&a, &b, sizeof a) != 0) ++mismatches;
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed < 5.0, std::to_string(compared) + " values over 1000 signals, " +
                                                  std::to_string(mismatches) + " mismatches, " + fmt(elapsed) + " s"};
}

// 3-6 -----------------------------------------------------------------------

using Studies = std::map<std::string, StudyResult>;

std::string mse_list(const StudyResult& r) {
    std::string out;
    for (const MethodStats& m : r.methods) {
        out += (out.empty() ? "" : " ") + to_string(m.method) + "=" + fmt(m.average_mse);
    }
    return out;
}

double avg(const StudyResult& r, Method m) { return r.of(m).average_mse; }

Outcome case1(const StudyResult& r) {
    const std::map<Method, double> published{
        {Method::M1, 0.0120}, {Method::M2, 0.0110}, {Method::M3, 0.0107}, {Method::M4, 0.0143}, {Method::M5, 0.0402}};
    bool ok = true;
    for (const auto& [m, ref] : published) {
        ok = ok && std::abs(avg(r, m) / ref - 1.0) <= 0.3;
    }
    Method best = Method::M1;
    Method worst = Method::M1;
    for (const MethodStats& s : r.methods) {
        if (s.average_mse < avg(r, best)) best = s.method;
        if (s.average_mse > avg(r, worst)) worst = s.method;
    }
    ok = ok && best == Method::M3 && worst == Method::M5;
    return {ok, mse_list(r) + "; best " + to_string(best) + ", worst " + to_string(worst)};
}

Outcome case2(const StudyResult& r) {
    const bool ok = avg(r, Method::M1) <= 0.0015 && avg(r, Method::M2) <= 0.0015 && avg(r, Method::M3) <= 0.0015 &&
                    avg(r, Method::M5) >= 0.02;
    return {ok, mse_list(r)};
}

Outcome case3(const StudyResult& r) {
    return {avg(r, Method::M1) > 1.0 && avg(r, Method::M3) < 0.2, mse_list(r)};
}

Outcome outlier_cases(const Studies& s) {
    bool ok = true;
    std::string detail;
    for (const char* name : {"case1a", "case2a", "case1b", "case2b"}) {
        const StudyResult& r = s.at(name);
        for (Method m : {Method::M1, Method::M2, Method::M3, Method::M4}) {
            ok = ok && avg(r, m) < avg(r, Method::M5);
        }
        detail += std::string(detail.empty() ? "" : "; ") + name + ": " + mse_list(r);
    }
    const StudyResult& a = s.at("case1a");
    double best = INFINITY;
    for (Method m : {Method::M1, Method::M2, Method::M3, Method::M4}) best = std::min(best, avg(a, m));
    ok = ok && avg(a, Method::M1) <= 1.15 * best;
    return {ok, detail};
}

// 7 -------------------------------------------------------------------------

Outcome attenuation() {
    double worst = 0.0;
    for (double phi21 : {-0.8, -0.1}) {
        const ParModel m = study_model(phi21);
        const auto pure = build_systems(theoretical_acvf(m, 0.0, 2), 2, 0);
        const EstimationResult r = estimate(Method::M5, theoretical_acvf(m, 0.8, 2), 2);
        for (int v = 0; v < 3; ++v) {
            const Eigen::MatrixXd& gx = pure[static_cast<std::size_t>(v)].low_matrix;
            const Eigen::VectorXd phi = m.phi.row(v).transpose();
            const Eigen::VectorXd expected =
                (gx + 0.8 * Eigen::MatrixXd::Identity(2, 2)).partialPivLu().solve(gx * phi);
            worst = std::max(worst, (r.phi_hat.row(v).transpose() - expected).cwiseAbs().maxCoeff());
        }
    }
    return {worst <= 1e-10, "max deviation " + fmt(worst) + " over 6 seasons"};
}

// 8 -------------------------------------------------------------------------

int rejections_in_batch(std::uint64_t master, int datasets) {
    const ParModel m = case_preset("case1").model;
    const int threads = resolve_thread_count(1);
    int rejections = 0;
    for (int d = 0; d < datasets; ++d) {
        const auto index = static_cast<std::uint64_t>(d);
        const Trajectory y = simulate_par(m, 80, derive_seed(master, Stream::Trial, index));
        NoiseTestOptions o;
        o.alpha = 0.05;
        o.replications = 1000;
        o.seed = derive_seed(master, Stream::NullReplication, index);
        o.threads = threads;
        if (noise_variance_test(y, 2, Method::M2, o).reject) ++rejections;
    }
    return rejections;
}

// A single batch of 500 has a binomial standard error near 1 point, so the full
// run pools six independent batches and reports each one.
Outcome test_size(bool smoke) {
    const auto start = Clock::now();
    const std::vector<std::uint64_t> masters = smoke ? std::vector<std::uint64_t>{8}
                                                     : std::vector<std::uint64_t>{8, 81, 82, 83, 84, 85};
    const int per_batch = smoke ? 100 : 500;
    const double tolerance = smoke ? 0.05 : 0.02;
    int rejections = 0;
    std::string batches;
    for (std::uint64_t master : masters) {
        const int r = rejections_in_batch(master, per_batch);
        rejections += r;
        batches += (batches.empty() ? "" : " ") + std::to_string(r) + "/" + std::to_string(per_batch);
    }
    const int datasets = per_batch * static_cast<int>(masters.size());
    const double rate = static_cast<double>(rejections) / datasets;
    const double se = std::sqrt(rate * (1.0 - rate) / datasets);
    const double elapsed = seconds_since(start);
    const bool ok = std::abs(rate - 0.05) <= tolerance + 1e-12 && (!smoke || elapsed < 120.0);
    return {ok, std::to_string(rejections) + "/" + std::to_string(datasets) + " rejected (" + fmt(100 * rate) +
                    "% +/- " + fmt(100 * se) + ", allowed 5 +/- " + fmt(100 * tolerance) + " points; batches " +
                    batches + "), " + fmt(elapsed) + " s"};
}

// 9 -------------------------------------------------------------------------

Outcome power_endpoints() {
    const CaseConfig c = case_preset("case2");
    PowerOptions o;
    o.test.alpha = 0.05;
    o.test.replications = 1000;
    o.test.seed = 9;
    o.test.threads = resolve_thread_count(1);
    o.trials = 1000;
    o.n_cycles = c.n_cycles;
    o.null_mode = NullMode::KnownModel;
    bool ok = true;
    std::string detail;
    for (Method method : {Method::M2, Method::M3}) {
        const auto curve = power_curve(c.model, GaussianNoise{0.8}, {0.0, 1.0}, method, o);
        const double size_bound = 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / curve[0].trials);
        ok = ok && curve[1].power >= 0.99 && curve[0].power <= size_bound;
        detail += std::string(detail.empty() ? "" : "; ") + to_string(method) + ": power(1)=" + fmt(curve[1].power) +
                  ", power(0)=" + fmt(curve[0].power) + " (bound " + fmt(size_bound) + ")";
    }
    return {ok, detail};
}

// 10 ------------------------------------------------------------------------

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary);
    std::ifstream fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    const std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    return sa == sb;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + PARNOISE_CLI_PATH + "\" --format none " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

bool studies_identical(const StudyResult& a, const StudyResult& b) {
    if (a.methods.size() != b.methods.size()) return false;
    for (std::size_t j = 0; j < a.methods.size(); ++j) {
        const MethodStats& ma = a.methods[j];
        const MethodStats& mb = b.methods[j];
        if (std::memcmp(&ma.average_mse, &mb.average_mse, sizeof(double)) != 0) return false;
        for (std::size_t i = 0; i < ma.coefficients.size(); ++i) {
            const auto& ea = ma.coefficients[i].estimates;
            const auto& eb = mb.coefficients[i].estimates;
            if (ea.size() != eb.size() || std::memcmp(ea.data(), eb.data(), ea.size() * sizeof(double)) != 0) {
                return false;
            }
        }
    }
    return true;
}

Outcome determinism(const Studies& single, bool smoke) {
    const fs::path work = fs::current_path() / (smoke ? "acceptance_smoke_work" : "acceptance_work");
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string w = "\"" + work.string() + "\"";
    const std::string input = " --input " + w + "/sim/series.csv --column value --period 3";

    struct Run {
        std::string name;
        std::string args;
        std::vector<std::string> outputs;
    };
    const std::vector<Run> runs{
        {"sim", "simulate --preset case1a --seed 3", {"series.csv"}},
        {"prep", "preprocess" + input + " --center huber", {"preprocessed.csv"}},
        {"acvf", "acvf" + input + " --max-lag 4", {"acvf.csv"}},
        {"est", "estimate" + input + " --order 2", {"estimate.json", "estimate.txt"}},
        {"test", "test" + input + " --order 2 --method M3 --replications 200 --seed 4",
         {"test_report.json", "test_report.txt"}},
        {"study", "study --preset case2b --trials 40", {"mse.csv", "boxplot.csv", "mse_table.txt"}},
        {"power", "power --preset case1 --trials 40 --replications 200 --betas 0,0.5,1 --null-mode refit",
         {"power.csv"}},
    };
    bool ok = true;
    int files = 0;
    std::string broken;
    for (const Run& r : runs) {
        const fs::path first = work / r.name;
        const fs::path again = work / (r.name + "_rerun");
        const bool ran = run_cli("--threads 1 " + r.args + " --out-dir \"" + first.string() + "\"") == 0 &&
                         run_cli("--threads 3 --config \"" + (first / "manifest.toml").string() + "\" " +
                                 r.args.substr(0, r.args.find(' ')) + " --out-dir \"" +
                                 again.string() + "\"") == 0;
        bool same = ran;
        for (const std::string& f : r.outputs) {
            same = same && same_bytes(first / f, again / f);
            ++files;
        }
        if (!same) {
            ok = false;
            broken += " " + r.name;
        }
    }

    int stable = 0;
    for (const auto& [name, result] : single) {
        CaseConfig c = case_preset(name);
        if (studies_identical(result, run_case_study(c, 4))) {
            ++stable;
        } else {
            ok = false;
            broken += " study:" + name;
        }
    }
    std::string detail = std::to_string(runs.size()) + " subcommands rerun from manifests (" + std::to_string(files) +
                         " files), " + std::to_string(stable) + "/" + std::to_string(single.size()) +
                         " presets bit-identical with 1 and 4 threads";
    if (!broken.empty()) detail += "; mismatched:" + broken;
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    bool smoke = false;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--smoke") {
            smoke = true;
        } else {
            std::cerr << "usage: acceptance [--smoke]\n";
            return 2;
        }
    }

    auto guarded = [](const std::function<Outcome()>& f) {
        try {
            return f();
        } catch (const std::exception& e) {
            return Outcome{false, std::string("exception: ") + e.what()};
        }
    };

    report(1, "oracle fixed points", guarded(oracle_suite));
    report(2, "empirical ACVF vs direct summation", guarded(acvf_equivalence));

    Studies studies;
    std::string study_error;
    try {
        for (const std::string& name : preset_names()) {
            studies.emplace(name, run_case_study(case_preset(name), 1));
        }
    } catch (const std::exception& e) {
        study_error = std::string("exception: ") + e.what();
    }
    auto with_studies = [&](const std::function<Outcome()>& f) {
        return study_error.empty() ? guarded(f) : Outcome{false, study_error};
    };
    report(3, "case 1 MSE table", with_studies([&] { return case1(studies.at("case1")); }));
    report(4, "case 2 MSE table", with_studies([&] { return case2(studies.at("case2")); }));
    report(5, "case 3 separation", with_studies([&] { return case3(studies.at("case3")); }));
    report(6, "outlier and mixture cases", with_studies([&] { return outlier_cases(studies); }));
    report(7, "M5 attenuation identity", guarded(attenuation));
    report(8, smoke ? "test size (smoke)" : "test size", guarded([&] { return test_size(smoke); }));
    report(9, "power endpoints", guarded(power_endpoints));
    report(10, "determinism", with_studies([&] { return determinism(studies, smoke); }));

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
