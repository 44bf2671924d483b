// parnoise: command-line front end for PAR estimation under additive noise.

#include "parnoise/acvf.hpp"
#include "parnoise/csv_io.hpp"
#include "parnoise/errors.hpp"
#include "parnoise/estimators.hpp"
#include "parnoise/experiments.hpp"
#include "parnoise/parallel.hpp"
#include "parnoise/preprocess.hpp"
#include "parnoise/rng.hpp"
#include "parnoise/testing.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace parnoise;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// option groups

struct ModelArgs {
    std::string preset;
    std::string phi;
    double sigma_xi2 = 1.0;
    std::string noise = "none";
    double noise_var = 0.8;
    double magnitude = 10.0;
    double prob = 0.004;
};

struct InputArgs {
    std::string input;
    std::string column = "0";
    int period = 0;
    bool log = false;
    std::string center = "none";
    double huber_c = 1.345;
};

struct EstimatorArgs {
    int s = 0;
    double delta0 = 1e-3;
    double delta = 1e-3;
    int max_iter = 200;
    double init_fraction = 0.9999;
};

struct GlobalArgs {
    int threads = 1;
    std::string format = "text";
};

void add_model_options(CLI::App* app, ModelArgs& a) {
    app->add_option("--preset", a.preset, "study preset: " + [] {
        std::string s;
        for (const std::string& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
        return s;
    }());
    app->add_option("--phi", a.phi, "coefficients, seasons separated by ';', lags by ',' (e.g. \"0.6,-0.8;-0.9,1.4\")");
    app->add_option("--sigma-xi2", a.sigma_xi2, "innovation variance")->capture_default_str();
    app->add_option("--noise", a.noise, "none | gaussian | outliers | mixture")
        ->check(CLI::IsMember({"none", "gaussian", "outliers", "mixture"}))
        ->capture_default_str();
    app->add_option("--noise-var", a.noise_var, "Gaussian noise variance (gaussian, mixture)")->capture_default_str();
    app->add_option("--outlier-magnitude", a.magnitude, "outlier magnitude a (outliers, mixture)")
        ->capture_default_str();
    app->add_option("--outlier-prob", a.prob, "P(Z=+a) = P(Z=-a) (outliers, mixture)")->capture_default_str();
}

void add_input_options(CLI::App* app, InputArgs& a) {
    app->add_option("--input", a.input, "CSV file with one observation per row")->required();
    app->add_option("--column", a.column, "column index (0-based) or header name")->capture_default_str();
    app->add_option("--period", a.period, "period T")->required()->check(CLI::PositiveNumber);
    app->add_flag("--log", a.log, "apply the natural logarithm first");
    app->add_option("--center", a.center, "none | mean | huber (per season)")
        ->check(CLI::IsMember({"none", "mean", "huber"}))
        ->capture_default_str();
    app->add_option("--huber-c", a.huber_c, "Huber tuning constant")->capture_default_str();
}

void add_estimator_options(CLI::App* app, EstimatorArgs& a) {
    app->add_option("--s", a.s, "number of high-order equations (0: s = p)")->capture_default_str();
    app->add_option("--delta0", a.delta0, "M4 bisection tolerance")->capture_default_str();
    app->add_option("--delta", a.delta, "M4 relative-change tolerance")->capture_default_str();
    app->add_option("--max-iter", a.max_iter, "M4 iteration cap")->capture_default_str();
    app->add_option("--init-fraction", a.init_fraction, "M4 initial search bound as a fraction of min-eig")
        ->capture_default_str();
}

void add_out_dir(CLI::App* app, std::string& dir) {
    app->add_option("--out-dir", dir, "directory for outputs and the run manifest")->capture_default_str();
}

// ---------------------------------------------------------------------------
// conversions

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(item);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw UsageError(what + ": cannot parse '" + text + "'");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) {
        throw UsageError(what + ": cannot parse '" + text + "'");
    }
    return value;
}

Eigen::MatrixXd parse_phi(const std::string& text) {
    const std::vector<std::string> rows = split(text, ';');
    if (rows.empty()) {
        throw UsageError("--phi: empty coefficient list");
    }
    std::vector<std::vector<double>> values;
    for (const std::string& row : rows) {
        std::vector<double> r;
        for (const std::string& cell : split(row, ',')) {
            r.push_back(parse_double(cell, "--phi"));
        }
        if (!values.empty() && r.size() != values.front().size()) {
            throw UsageError("--phi: every season needs the same number of lags");
        }
        values.push_back(std::move(r));
    }
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.front().size()));
    for (std::size_t v = 0; v < values.size(); ++v) {
        for (std::size_t i = 0; i < values[v].size(); ++i) {
            phi(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(i)) = values[v][i];
        }
    }
    return phi;
}

std::string format_phi(const Eigen::MatrixXd& phi) {
    std::string out;
    for (Eigen::Index v = 0; v < phi.rows(); ++v) {
        if (v > 0) out += ';';
        for (Eigen::Index i = 0; i < phi.cols(); ++i) {
            if (i > 0) out += ',';
            out += format_full(phi(v, i));
        }
    }
    return out;
}

bool given(const CLI::App* app, const std::string& name) { return app->get_option(name)->count() > 0; }

struct ResolvedModel {
    ParModel model;
    NoiseModel noise;
    std::optional<CaseConfig> preset;
};

// Preset values first, explicit flags on top.
ResolvedModel resolve_model(const CLI::App* app, ModelArgs& a) {
    ResolvedModel r;
    if (!a.preset.empty()) {
        try {
            r.preset = case_preset(a.preset);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        r.model = r.preset->model;
        r.noise = r.preset->noise;
    } else if (a.phi.empty()) {
        throw UsageError("specify the model with --phi or --preset");
    }
    if (!a.phi.empty()) {
        r.model.phi = parse_phi(a.phi);
        r.model.period = static_cast<int>(r.model.phi.rows());
        r.model.order = static_cast<int>(r.model.phi.cols());
    }
    if (r.preset && !given(app, "--sigma-xi2")) {
        a.sigma_xi2 = r.model.sigma_xi2;
    }
    r.model.sigma_xi2 = a.sigma_xi2;

    const bool noise_given = given(app, "--noise") || given(app, "--noise-var") || given(app, "--outlier-magnitude") ||
                             given(app, "--outlier-prob");
    if (r.preset && !noise_given) {
        if (const auto* g = std::get_if<GaussianNoise>(&r.noise)) {
            a.noise = "gaussian";
            a.noise_var = g->variance;
        } else if (const auto* o = std::get_if<TwoPointOutliers>(&r.noise)) {
            a.noise = "outliers";
            a.magnitude = o->magnitude;
            a.prob = o->prob_each;
        } else if (const auto* m = std::get_if<MixtureNoise>(&r.noise)) {
            a.noise = "mixture";
            a.noise_var = m->gauss_variance;
            a.magnitude = m->magnitude;
            a.prob = m->prob_each;
        } else {
            a.noise = "none";
        }
    }
    if (a.noise == "gaussian") {
        r.noise = GaussianNoise{a.noise_var};
    } else if (a.noise == "outliers") {
        r.noise = TwoPointOutliers{a.magnitude, a.prob};
    } else if (a.noise == "mixture") {
        r.noise = MixtureNoise{a.noise_var, a.magnitude, a.prob};
    } else {
        r.noise = NoNoise{};
    }
    a.phi = format_phi(r.model.phi);
    validate(r.model);
    validate(r.noise);
    return r;
}

EstimatorOptions make_estimator_options(const EstimatorArgs& a) {
    EstimatorOptions o;
    o.high_order_count = a.s;
    o.delta0 = a.delta0;
    o.delta = a.delta;
    o.max_iter = a.max_iter;
    o.init_upper_fraction = a.init_fraction;
    return o;
}

Trajectory load_input(const InputArgs& a) {
    const IngestResult r = ingest_csv(a.input, a.column, a.period);
    for (const std::string& w : r.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    PreprocessSpec spec;
    spec.log_transform = a.log;
    spec.center = a.center == "mean" ? Centering::PerSeasonMean
                  : a.center == "huber" ? Centering::PerSeasonHuber
                                        : Centering::None;
    spec.huber.c = a.huber_c;
    return preprocess(r.trajectory, spec);
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const std::string& n : names) {
        try {
            out.push_back(parse_method(n));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// manifest

std::string toml_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

using Overrides = std::map<std::string, std::string>;

std::string option_value(const CLI::Option* opt, const Overrides& resolved) {
    const std::string key = opt->get_single_name();
    if (const auto it = resolved.find(key); it != resolved.end()) {
        return it->second;
    }
    if (opt->get_expected_max() > 1) {
        std::vector<std::string> items = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
        std::string out = "[";
        for (std::size_t i = 0; i < items.size(); ++i) {
            out += (i ? "," : "") + toml_quote(items[i]);
        }
        return out + "]";
    }
    return toml_quote(opt->count() > 0 ? opt->results().back() : opt->get_default_str());
}

bool has_value(const CLI::Option* opt, const Overrides& resolved) {
    return resolved.count(opt->get_single_name()) > 0 || opt->count() > 0 || !opt->get_default_str().empty();
}

std::string list_value(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i ? "," : "") + toml_quote(items[i]);
    }
    return out + "]";
}

void write_manifest(const fs::path& dir, const CLI::App& root, const CLI::App& sub, const Overrides& resolved) {
    std::ofstream out(dir / "manifest.toml");
    out << "# parnoise run manifest; rerun with: parnoise --config manifest.toml\n";
    for (const CLI::Option* opt : root.get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config" || name == "version" || opt->get_lnames().empty() ||
            !has_value(opt, {})) {
            continue;
        }
        out << name << '=' << option_value(opt, {}) << '\n';
    }
    out << '[' << sub.get_name() << "]\n";
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || opt->get_lnames().empty() || !has_value(opt, resolved)) continue;
        out << name << '=' << option_value(opt, resolved) << '\n';
    }
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

// ---------------------------------------------------------------------------
// reports

json phi_json(const Eigen::MatrixXd& phi) {
    json rows = json::array();
    for (Eigen::Index v = 0; v < phi.rows(); ++v) {
        json r = json::array();
        for (Eigen::Index i = 0; i < phi.cols(); ++i) {
            r.push_back(std::isfinite(phi(v, i)) ? json(phi(v, i)) : json(nullptr));
        }
        rows.push_back(r);
    }
    return rows;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json estimate_json(const EstimationResult& r) {
    json j;
    j["method"] = to_string(r.method);
    j["order"] = r.order;
    j["period"] = r.period;
    j["phi"] = phi_json(r.phi_hat);
    j["sigma_xi2"] = number_or_null(r.sigma_xi2_hat);
    j["sigma_z2"] = r.sigma_z2_hat ? number_or_null(*r.sigma_z2_hat) : json(nullptr);
    json seasons = json::array();
    for (std::size_t v = 0; v < r.diagnostics.size(); ++v) {
        const SeasonDiagnostics& d = r.diagnostics[v];
        json s;
        s["season"] = v + 1;
        s["sigma_xi2"] = number_or_null(r.sigma_xi2_by_season[v]);
        s["sigma_z2"] = r.sigma_z2_by_season.empty() ? json(nullptr) : number_or_null(r.sigma_z2_by_season[v]);
        s["condition_number"] = number_or_null(d.condition_number);
        s["iterations"] = d.iterations;
        s["converged"] = d.converged;
        s["singular"] = d.singular;
        s["excluded_from_variance"] = d.excluded_from_variance;
        s["boundary"] = d.boundary;
        s["degenerate_interval"] = d.degenerate_interval;
        s["bisection_failed"] = d.bisection_failed;
        s["note"] = d.note;
        seasons.push_back(s);
    }
    j["seasons"] = seasons;
    return j;
}

void estimate_text(std::ostream& os, const EstimationResult& r) {
    os << "method " << to_string(r.method) << " (p=" << r.order << ", T=" << r.period << ")\n";
    os << std::left << std::setw(8) << "season";
    for (int i = 1; i <= r.order; ++i) os << std::setw(14) << ("phi" + std::to_string(i));
    os << std::setw(14) << "sigma_xi2" << std::setw(14) << "sigma_z2" << "notes\n";
    for (int v = 0; v < r.period; ++v) {
        os << std::setw(8) << v + 1;
        for (int i = 0; i < r.order; ++i) os << std::setw(14) << format_short(r.phi_hat(v, i));
        const auto sv = static_cast<std::size_t>(v);
        os << std::setw(14) << format_short(r.sigma_xi2_by_season[sv]) << std::setw(14)
           << (r.sigma_z2_by_season.empty() ? std::string("-") : format_short(r.sigma_z2_by_season[sv]))
           << r.diagnostics[sv].note << '\n';
    }
    os << "sigma_xi2 " << format_short(r.sigma_xi2_hat) << '\n';
    if (r.sigma_z2_hat) os << "sigma_z2  " << format_short(*r.sigma_z2_hat) << '\n';
}

std::string region_name(Region r) { return r == Region::OneSided ? "one-sided" : "two-sided"; }

json test_json(const NoiseTestReport& r) {
    json j;
    j["method"] = to_string(r.method);
    j["statistic"] = r.statistic;
    j["alpha"] = r.alpha;
    j["replications"] = r.replications;
    j["region"] = region_name(r.region);
    j["lower_threshold"] = number_or_null(r.lower_threshold);
    j["threshold"] = r.threshold;
    j["decision"] = r.reject ? "reject" : "accept";
    j["seed"] = r.seed;
    j["failed_replications"] = r.failed_replications;
    j["fit"] = estimate_json(r.fit);
    j["null_samples"] = r.null_samples;
    return j;
}

void test_text(std::ostream& os, const NoiseTestReport& r) {
    os << "H0: pure PAR  vs  H1: PAR + additive noise\n";
    os << "method      " << to_string(r.method) << '\n';
    os << "statistic   " << format_short(r.statistic) << '\n';
    os << "region      " << region_name(r.region) << " ";
    if (r.region == Region::OneSided) {
        os << "(-inf, " << format_short(r.threshold) << "]\n";
    } else {
        os << "[" << format_short(r.lower_threshold) << ", " << format_short(r.threshold) << "]\n";
    }
    os << "threshold   " << format_short(r.threshold) << '\n';
    os << "alpha       " << r.alpha << '\n';
    os << "M           " << r.replications << " (" << r.failed_replications << " failed)\n";
    os << "seed        " << r.seed << '\n';
    os << "decision    " << (r.reject ? "reject H0" : "accept H0") << '\n';
}

void emit(const GlobalArgs& g, const std::string& text, const json& j) {
    if (g.format == "json") {
        std::cout << j.dump(2) << '\n';
    } else if (g.format == "text") {
        std::cout << text;
    }
}

// ---------------------------------------------------------------------------
// subcommands

struct SimulateArgs {
    ModelArgs model;
    std::size_t cycles = 80;
    int burn_in = kDefaultBurnInCycles;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

void run_simulate(const CLI::App& root, CLI::App& sub, SimulateArgs& a, const GlobalArgs&) {
    const ResolvedModel m = resolve_model(&sub, a.model);
    if (m.preset && !given(&sub, "--cycles")) a.cycles = m.preset->n_cycles;
    const Trajectory x = simulate_par(m.model, a.cycles, derive_seed(a.seed, Stream::Signal), a.burn_in);
    const Trajectory z = sample_noise(m.noise, x.size(), derive_seed(a.seed, Stream::Noise), m.model.period);
    const Trajectory y = corrupt(x, z);

    const fs::path dir = prepare_dir(a.out_dir);
    std::ofstream out(dir / "series.csv");
    write_series_csv(out, y.values);
    write_manifest(dir, root, sub, {{"phi", toml_quote(a.model.phi)}, {"cycles", toml_quote(std::to_string(a.cycles))},
                                    {"sigma-xi2", toml_quote(format_full(a.model.sigma_xi2))},
                                    {"noise", toml_quote(a.model.noise)},
                                    {"noise-var", toml_quote(format_full(a.model.noise_var))},
                                    {"outlier-magnitude", toml_quote(format_full(a.model.magnitude))},
                                    {"outlier-prob", toml_quote(format_full(a.model.prob))}});
    std::cerr << "wrote " << y.size() << " observations (T=" << y.period << ", " << describe(m.noise) << ") to "
              << (dir / "series.csv").string() << '\n';
}

struct EstimateArgs {
    InputArgs input;
    EstimatorArgs est;
    int order = 1;
    std::vector<std::string> methods{"M1", "M2", "M3", "M4", "M5"};
    std::string out_dir = ".";
};

void run_estimate(const CLI::App& root, CLI::App& sub, EstimateArgs& a, const GlobalArgs& g) {
    const Trajectory y = load_input(a.input);
    const EstimatorOptions options = make_estimator_options(a.est);
    const std::vector<Method> methods = parse_methods(a.methods);
    int max_lag = 0;
    for (Method m : methods) max_lag = std::max(max_lag, required_max_lag(m, a.order, options));
    const AcvfTable table = acvf_table(y, max_lag);

    std::ostringstream text;
    json j = json::array();
    for (Method m : methods) {
        const EstimationResult r = estimate(m, table, a.order, options);
        estimate_text(text, r);
        text << '\n';
        j.push_back(estimate_json(r));
    }
    const fs::path dir = prepare_dir(a.out_dir);
    std::ofstream(dir / "estimate.txt") << text.str();
    std::ofstream(dir / "estimate.json") << j.dump(2) << '\n';
    write_manifest(dir, root, sub, {{"methods", list_value(a.methods)}});
    emit(g, text.str(), j);
}

struct AcvfArgs {
    InputArgs input;
    int max_lag = 4;
    std::string out_dir = ".";
};

void run_acvf(const CLI::App& root, CLI::App& sub, AcvfArgs& a, const GlobalArgs&) {
    const AcvfTable t = acvf_table(load_input(a.input), a.max_lag);
    const fs::path dir = prepare_dir(a.out_dir);
    std::ofstream out(dir / "acvf.csv");
    out << "season,lag,value\n";
    for (int w = 1; w <= t.period(); ++w) {
        for (int k = -t.max_lag(); k <= t.max_lag(); ++k) {
            out << w << ',' << k << ',' << format_full(t(w, k)) << '\n';
        }
    }
    write_manifest(dir, root, sub, {});
}

struct TestArgs {
    InputArgs input;
    EstimatorArgs est;
    int order = 1;
    std::string method = "M2";
    double alpha = 0.05;
    int replications = 1000;
    std::uint64_t seed = 1;
    std::string region = "one-sided";
    int burn_in = kDefaultBurnInCycles;
    std::string out_dir = ".";
};

void run_test(const CLI::App& root, CLI::App& sub, TestArgs& a, const GlobalArgs& g) {
    const Trajectory y = load_input(a.input);
    NoiseTestOptions o;
    o.alpha = a.alpha;
    o.replications = a.replications;
    o.seed = a.seed;
    o.region = a.region == "two-sided" ? Region::TwoSided : Region::OneSided;
    o.estimator = make_estimator_options(a.est);
    o.burn_in_cycles = a.burn_in;
    o.threads = resolve_thread_count(g.threads);
    const NoiseTestReport r = noise_variance_test(y, a.order, parse_methods({a.method}).front(), o);

    std::ostringstream text;
    test_text(text, r);
    const json j = test_json(r);
    const fs::path dir = prepare_dir(a.out_dir);
    std::ofstream(dir / "test_report.txt") << text.str();
    std::ofstream(dir / "test_report.json") << j.dump(2) << '\n';
    write_manifest(dir, root, sub, {});
    emit(g, text.str(), j);
}

struct StudyArgs {
    ModelArgs model;
    EstimatorArgs est;
    std::size_t cycles = 80;
    int trials = 1000;
    std::uint64_t seed = 0;
    int burn_in = kDefaultBurnInCycles;
    std::vector<std::string> methods{"M1", "M2", "M3", "M4", "M5"};
    std::string out_dir = ".";
};

void run_study(const CLI::App& root, CLI::App& sub, StudyArgs& a, const GlobalArgs& g) {
    const ResolvedModel m = resolve_model(&sub, a.model);
    CaseConfig c = m.preset ? *m.preset : CaseConfig{};
    if (!m.preset) c.name = "custom";
    c.model = m.model;
    c.noise = m.noise;
    if (m.preset && !given(&sub, "--cycles")) a.cycles = c.n_cycles;
    if (m.preset && !given(&sub, "--trials")) a.trials = c.trials;
    if (m.preset && !given(&sub, "--seed")) a.seed = c.master_seed;
    if (m.preset && !given(&sub, "--s")) a.est.s = c.estimator.high_order_count;
    c.n_cycles = a.cycles;
    c.trials = a.trials;
    c.master_seed = a.seed;
    c.burn_in_cycles = a.burn_in;
    c.estimator = make_estimator_options(a.est);
    c.methods = parse_methods(a.methods);

    const StudyResult r = run_case_study(c, resolve_thread_count(g.threads));
    const fs::path dir = prepare_dir(a.out_dir);
    std::ofstream mse_out(dir / "mse.csv");
    write_mse_csv(mse_out, r);
    std::ofstream box_out(dir / "boxplot.csv");
    write_boxplot_csv(box_out, r);
    std::ostringstream table;
    write_mse_table(table, r);
    std::ofstream(dir / "mse_table.txt") << table.str();
    write_manifest(dir, root, sub,
                   {{"phi", toml_quote(a.model.phi)}, {"cycles", toml_quote(std::to_string(a.cycles))},
                    {"trials", toml_quote(std::to_string(a.trials))}, {"seed", toml_quote(std::to_string(a.seed))},
                    {"s", toml_quote(std::to_string(a.est.s))},
                    {"sigma-xi2", toml_quote(format_full(a.model.sigma_xi2))}, {"noise", toml_quote(a.model.noise)},
                    {"noise-var", toml_quote(format_full(a.model.noise_var))},
                    {"outlier-magnitude", toml_quote(format_full(a.model.magnitude))},
                    {"outlier-prob", toml_quote(format_full(a.model.prob))}, {"methods", list_value(a.methods)}});
    std::cout << r.case_name << ": " << r.trials << " trials\n" << table.str();
}

struct PowerArgs {
    ModelArgs model;
    EstimatorArgs est;
    std::size_t cycles = 80;
    int trials = 1000;
    int replications = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int burn_in = kDefaultBurnInCycles;
    std::string null_mode = "known";
    std::vector<double> betas;
    std::vector<std::string> methods{"M1", "M2", "M3", "M4"};
    std::string out_dir = ".";
};

void run_power(const CLI::App& root, CLI::App& sub, PowerArgs& a, const GlobalArgs& g) {
    const ResolvedModel m = resolve_model(&sub, a.model);
    if (m.preset && !given(&sub, "--cycles")) a.cycles = m.preset->n_cycles;
    if (m.preset && !given(&sub, "--s")) a.est.s = m.preset->estimator.high_order_count;
    if (a.betas.empty()) {
        for (int i = 0; i <= 20; ++i) a.betas.push_back(i / 20.0);
    }
    if (std::holds_alternative<NoNoise>(m.noise)) {
        throw UsageError("power needs a noise family (--noise or a preset)");
    }
    PowerOptions o;
    o.test.alpha = a.alpha;
    o.test.replications = a.replications;
    o.test.seed = a.seed;
    o.test.estimator = make_estimator_options(a.est);
    o.test.burn_in_cycles = a.burn_in;
    o.test.threads = resolve_thread_count(g.threads);
    o.trials = a.trials;
    o.n_cycles = a.cycles;
    o.null_mode = a.null_mode == "refit" ? NullMode::Refit : NullMode::KnownModel;

    const fs::path dir = prepare_dir(a.out_dir);
    std::ostringstream csv;
    csv << "beta,power,trials,alpha,method\n";
    for (Method method : parse_methods(a.methods)) {
        for (const PowerPoint& p : power_curve(m.model, m.noise, a.betas, method, o)) {
            csv << format_full(p.beta) << ',' << format_full(p.power) << ',' << p.trials << ','
                << format_full(a.alpha) << ',' << to_string(method) << '\n';
        }
    }
    std::ofstream(dir / "power.csv") << csv.str();
    std::vector<std::string> beta_text;
    for (double b : a.betas) beta_text.push_back(format_full(b));
    write_manifest(dir, root, sub,
                   {{"phi", toml_quote(a.model.phi)}, {"cycles", toml_quote(std::to_string(a.cycles))},
                    {"s", toml_quote(std::to_string(a.est.s))},
                    {"sigma-xi2", toml_quote(format_full(a.model.sigma_xi2))}, {"noise", toml_quote(a.model.noise)},
                    {"noise-var", toml_quote(format_full(a.model.noise_var))},
                    {"outlier-magnitude", toml_quote(format_full(a.model.magnitude))},
                    {"outlier-prob", toml_quote(format_full(a.model.prob))}, {"betas", list_value(beta_text)},
                    {"methods", list_value(a.methods)}});
    std::cout << csv.str();
}

struct PreprocessArgs {
    InputArgs input;
    std::string out_dir = ".";
};

void run_preprocess(const CLI::App& root, CLI::App& sub, PreprocessArgs& a, const GlobalArgs&) {
    const Trajectory y = load_input(a.input);
    const fs::path dir = prepare_dir(a.out_dir);
    std::ofstream out(dir / "preprocessed.csv");
    write_series_csv(out, y.values);
    write_manifest(dir, root, sub, {});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic autoregressive models with additive noise: simulation, estimation, noise testing"};
    app.set_config("--config", "", "TOML/INI configuration file (command-line flags take precedence)");
    app.require_subcommand(1);
    GlobalArgs g;
    app.add_option("--threads", g.threads, std::string("worker threads (overridden by ") + kThreadsEnvVar + ")")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "stdout format for reports: text | json | none")
        ->check(CLI::IsMember({"text", "json", "none"}))
        ->capture_default_str();

    SimulateArgs sim;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "simulate a (noisy) PAR trajectory to series.csv");
    add_model_options(sim_cmd, sim.model);
    sim_cmd->add_option("--cycles", sim.cycles, "number of cycles N (length NT)")->capture_default_str();
    sim_cmd->add_option("--burn-in", sim.burn_in, "discarded burn-in cycles")->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "master seed")->capture_default_str();
    add_out_dir(sim_cmd, sim.out_dir);

    EstimateArgs est;
    CLI::App* est_cmd = app.add_subcommand("estimate", "estimate PAR coefficients and variances from a CSV series");
    add_input_options(est_cmd, est.input);
    est_cmd->add_option("--order", est.order, "autoregressive order p")->capture_default_str();
    est_cmd->add_option("--methods", est.methods, "methods among M1..M5")->delimiter(',')->capture_default_str();
    add_estimator_options(est_cmd, est.est);
    add_out_dir(est_cmd, est.out_dir);

    AcvfArgs acvf;
    CLI::App* acvf_cmd = app.add_subcommand("acvf", "empirical periodic autocovariances to acvf.csv");
    add_input_options(acvf_cmd, acvf.input);
    acvf_cmd->add_option("--max-lag", acvf.max_lag, "largest |lag|")->capture_default_str();
    add_out_dir(acvf_cmd, acvf.out_dir);

    TestArgs test;
    CLI::App* test_cmd = app.add_subcommand("test", "Monte Carlo test for additive noise");
    add_input_options(test_cmd, test.input);
    test_cmd->add_option("--order", test.order, "autoregressive order p")->capture_default_str();
    test_cmd->add_option("--method", test.method, "M1..M4")->capture_default_str();
    test_cmd->add_option("--alpha", test.alpha, "significance level")->capture_default_str();
    test_cmd->add_option("--replications", test.replications, "Monte Carlo replications M")->capture_default_str();
    test_cmd->add_option("--seed", test.seed, "master seed")->capture_default_str();
    test_cmd->add_option("--region", test.region, "one-sided | two-sided")
        ->check(CLI::IsMember({"one-sided", "two-sided"}))
        ->capture_default_str();
    test_cmd->add_option("--burn-in", test.burn_in, "burn-in cycles of the null simulations")->capture_default_str();
    add_estimator_options(test_cmd, test.est);
    add_out_dir(test_cmd, test.out_dir);

    StudyArgs study;
    CLI::App* study_cmd = app.add_subcommand("study", "Monte Carlo estimation study (MSE table and boxplot data)");
    add_model_options(study_cmd, study.model);
    study_cmd->add_option("--cycles", study.cycles, "cycles per trajectory (preset value if omitted)")
        ->capture_default_str();
    study_cmd->add_option("--trials", study.trials, "number of trajectories M (preset value if omitted)")
        ->capture_default_str();
    study_cmd->add_option("--seed", study.seed, "master seed (preset value if omitted)")->capture_default_str();
    study_cmd->add_option("--burn-in", study.burn_in, "burn-in cycles")->capture_default_str();
    study_cmd->add_option("--methods", study.methods, "methods among M1..M5")->delimiter(',')->capture_default_str();
    add_estimator_options(study_cmd, study.est);
    add_out_dir(study_cmd, study.out_dir);

    PowerArgs power;
    CLI::App* power_cmd = app.add_subcommand("power", "power of the noise test against noise scale beta");
    add_model_options(power_cmd, power.model);
    power_cmd->add_option("--cycles", power.cycles, "cycles per trajectory (preset value if omitted)")
        ->capture_default_str();
    power_cmd->add_option("--trials", power.trials, "trajectories per beta")->capture_default_str();
    power_cmd->add_option("--replications", power.replications, "Monte Carlo replications M")->capture_default_str();
    power_cmd->add_option("--alpha", power.alpha, "significance level")->capture_default_str();
    power_cmd->add_option("--seed", power.seed, "master seed")->capture_default_str();
    power_cmd->add_option("--burn-in", power.burn_in, "burn-in cycles")->capture_default_str();
    power_cmd->add_option("--null-mode", power.null_mode, "known (region from the true model) | refit (full test per trial)")
        ->check(CLI::IsMember({"known", "refit"}))
        ->capture_default_str();
    power_cmd->add_option("--betas", power.betas, "noise scales in [0,1] (default 0, 0.05, ..., 1)")->delimiter(',');
    power_cmd->add_option("--methods", power.methods, "methods among M1..M4")->delimiter(',')->capture_default_str();
    add_estimator_options(power_cmd, power.est);
    add_out_dir(power_cmd, power.out_dir);

    PreprocessArgs prep;
    CLI::App* prep_cmd = app.add_subcommand("preprocess", "log-transform and/or center a CSV series");
    add_input_options(prep_cmd, prep.input);
    add_out_dir(prep_cmd, prep.out_dir);

    for (CLI::App* sub : {sim_cmd, est_cmd, acvf_cmd, test_cmd, study_cmd, power_cmd, prep_cmd}) {
        sub->configurable();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (sim_cmd->parsed()) run_simulate(app, *sim_cmd, sim, g);
        if (est_cmd->parsed()) run_estimate(app, *est_cmd, est, g);
        if (acvf_cmd->parsed()) run_acvf(app, *acvf_cmd, acvf, g);
        if (test_cmd->parsed()) run_test(app, *test_cmd, test, g);
        if (study_cmd->parsed()) run_study(app, *study_cmd, study, g);
        if (power_cmd->parsed()) run_power(app, *power_cmd, power, g);
        if (prep_cmd->parsed()) run_preprocess(app, *prep_cmd, prep, g);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return 0;
}
