// Experiment harness. Every subcommand reads a JSON config layered over
// built-in defaults, applies flag overrides and writes its artifacts plus a
// metadata sidecar into the output directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pusmi/data.hpp"
#include "pusmi/estimator.hpp"
#include "pusmi/experiments.hpp"
#include "pusmi/kernels.hpp"
#include "pusmi/pnsmi.hpp"
#include "pusmi/puit.hpp"
#include "pusmi/purl.hpp"
#include "pusmi/serialize.hpp"

namespace fs = std::filesystem;
using namespace pusmi;
using io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

class ConfigError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

Json defaults() {
    return Json::parse(R"({
      "seed": 0,
      "prior": 0.5,
      "threads": 0,
      "out": ".",
      "data": {"input": null, "generator": "toy", "prior": null, "n_p": 100, "n_u": 400},
      "estimator": {"sigma_grid": [], "lambda_grid": [0.001, 0.01, 0.1, 1.0], "max_centers": 200, "folds": 5},
      "sweep": {"axis": "positive", "grid": [10, 20, 30, 40, 50, 60, 70, 80, 90, 100,
                                             110, 120, 130, 140, 150, 160, 170, 180, 190, 200],
                "fixed": 400, "trials": 50, "pool_size": 10000},
      "purl": {},
      "purl_train": {"preset": "auto", "validation_fraction": 0.2},
      "purl_toy": {"eval_size": 500},
      "test": {"b_count": 1000, "scheme": "pooled", "select_on_pseudo": true, "recv_per_round": false},
      "type2": {"n_p_grid": [10, 20, 30, 40, 50, 60, 70, 80, 90, 100], "n_u_grid": [400],
                "level": 0.05, "trials": 50}
    })");
}

/// Rejects keys the defaults do not know. "purl" is free-form and checked by
/// the PURL config reader; "generator" may be a name or a spec object.
void check_keys(const Json& user, const Json& base, const std::string& path) {
    if (!user.is_object()) throw ConfigError("config " + (path.empty() ? "root" : path) + " must be an object");
    for (const auto& [key, value] : user.items()) {
        const std::string where = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) throw ConfigError("unknown config key: " + where);
        if (where == "purl" || where == "data.generator" || where == "data.input") continue;
        if (base.at(key).is_object() && !value.is_null()) check_keys(value, base.at(key), where);
    }
}

struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<double> prior;
    std::optional<double> data_prior;
    std::optional<std::string> input;
    std::optional<std::string> generator;
    std::optional<Eigen::Index> n_p;
    std::optional<Eigen::Index> n_u;
    std::optional<int> trials;
    std::optional<int> b_count;
    bool recv_per_round = false;
};

Json effective_config(const Flags& f) {
    Json cfg = defaults();
    if (f.config) {
        std::ifstream in(*f.config);
        if (!in) throw ConfigError("cannot open config " + *f.config);
        Json user;
        try {
            user = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw ConfigError("config " + *f.config + ": " + e.what());
        }
        check_keys(user, cfg, "");
        cfg.merge_patch(user);
    }
    if (f.seed) cfg["seed"] = *f.seed;
    if (f.out) cfg["out"] = *f.out;
    if (f.threads) cfg["threads"] = *f.threads;
    if (f.prior) cfg["prior"] = *f.prior;
    if (f.data_prior) cfg["data"]["prior"] = *f.data_prior;
    if (f.input) cfg["data"]["input"] = *f.input;
    if (f.generator) cfg["data"]["generator"] = *f.generator;
    if (f.n_p) cfg["data"]["n_p"] = *f.n_p;
    if (f.n_u) cfg["data"]["n_u"] = *f.n_u;
    if (f.trials) {
        cfg["sweep"]["trials"] = *f.trials;
        cfg["type2"]["trials"] = *f.trials;
    }
    if (f.b_count) cfg["test"]["b_count"] = *f.b_count;
    if (f.recv_per_round) cfg["test"]["recv_per_round"] = true;
    return cfg;
}

// ---- config readers --------------------------------------------------------

/// Prior used to draw data. Falls back to the estimation prior when unset.
ClassPrior data_prior(const Json& cfg) {
    const Json& p = cfg.at("data").at("prior");
    return ClassPrior(p.is_null() ? cfg.at("prior").get<double>() : p.get<double>());
}

GaussianMixtureSpec generator_spec(const Json& g, ClassPrior prior) {
    if (g.is_string()) {
        const auto name = g.get<std::string>();
        if (name == "toy") return GaussianMixtureSpec::toy(prior.theta_p());
        if (name == "null") return GaussianMixtureSpec::null_toy(prior.theta_p());
        throw ConfigError("unknown generator '" + name + "' (expected toy, null or a spec object)");
    }
    GaussianMixtureSpec s;
    s.mean_pos = io::vector_from_json(g.at("mean_pos"));
    s.mean_neg = io::vector_from_json(g.at("mean_neg"));
    s.cov_diag = io::vector_from_json(g.at("cov_diag"));
    s.prior = prior;
    s.validate();
    return s;
}

EstimatorConfig estimator_config(const Json& cfg) {
    const Json& e = cfg.at("estimator");
    EstimatorConfig c;
    c.sigma_grid = e.at("sigma_grid").get<std::vector<double>>();
    c.lambda_grid = e.at("lambda_grid").get<std::vector<double>>();
    c.max_centers = e.at("max_centers").get<Eigen::Index>();
    c.folds = e.at("folds").get<int>();
    c.seed = derive_seed(cfg.at("seed").get<std::uint64_t>(), 12);
    require(!c.lambda_grid.empty(), "estimator.lambda_grid must not be empty");
    return c;
}

PermTestOptions test_options(const Json& t) {
    PermTestOptions o;
    o.b_count = t.at("b_count").get<int>();
    const auto scheme = t.at("scheme").get<std::string>();
    if (scheme == "pooled")
        o.scheme = PseudoScheme::kPooled;
    else if (scheme == "disjoint")
        o.scheme = PseudoScheme::kDisjoint;
    else if (scheme == "nested")
        o.scheme = PseudoScheme::kNested;
    else
        throw ConfigError("unknown test.scheme '" + scheme + "'");
    o.select_on_pseudo = t.at("select_on_pseudo").get<bool>();
    o.recv_per_round = t.at("recv_per_round").get<bool>();
    return o;
}

bool has_input(const Json& cfg) { return !cfg.at("data").at("input").is_null(); }

PuDataset load_pu(const Json& cfg, std::uint64_t seed) {
    const Json& d = cfg.at("data");
    const ClassPrior prior = data_prior(cfg);
    const auto n_p = d.at("n_p").get<Eigen::Index>();
    const auto n_u = d.at("n_u").get<Eigen::Index>();
    if (has_input(cfg))
        return make_pu(load_labeled(d.at("input").get<std::string>()), n_p, n_u, prior, derive_seed(seed, 11));
    return sample_gaussian_pu(generator_spec(d.at("generator"), prior), n_p, n_u, derive_seed(seed, 11));
}

// ---- output ----------------------------------------------------------------

class Output {
public:
    explicit Output(const Json& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
        dir_ = cfg.at("out").get<std::string>();
    }

    void json(const std::string& name, const Json& doc) {
        write(name, doc.dump(2) + "\n");
    }

    /// Writes `body` and a sidecar `<stem>.meta.json` with the config and version.
    void csv(const std::string& name, const std::string& body, Json extra = Json::object()) {
        write(name, body);
        Json meta{{"version", kVersion}, {"command", command_}, {"artifact", name}, {"config", cfg_}};
        for (const auto& [k, v] : extra.items()) meta[k] = v;
        write(fs::path(name).stem().string() + ".meta.json", meta.dump(2) + "\n");
    }

private:
    void write(const std::string& name, const std::string& body) {
        fs::create_directories(dir_);
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + path.string());
        out << body;
    }

    Json cfg_;
    std::string command_;
    fs::path dir_;
};

std::string to_csv(const std::function<void(std::ostream&)>& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

// ---- commands --------------------------------------------------------------

void cmd_estimate(const Json& cfg) {
    const std::uint64_t seed = cfg.at("seed");
    const ClassPrior prior(cfg.at("prior").get<double>());
    const PuDataset data = load_pu(cfg, seed);
    const EstimateResult r = estimate_smi(data, prior, estimator_config(cfg));
    const Json doc{{"version", kVersion},
                   {"n_p", data.n_p()},
                   {"n_u", data.n_u()},
                   {"estimate", io::to_json(r.estimate)},
                   {"report", io::to_json(r.report)},
                   {"model", io::to_json(r.model)}};
    Output(cfg, "estimate").json("estimate.json", doc);
    std::cout << doc.at("estimate").dump(2) << "\n";
}

void cmd_fig1_sweep(const Json& cfg) {
    const std::uint64_t seed = cfg.at("seed");
    const ClassPrior prior = data_prior(cfg);
    const Json& s = cfg.at("sweep");
    const auto axis_name = s.at("axis").get<std::string>();
    if (axis_name != "positive" && axis_name != "unlabeled")
        throw ConfigError("sweep.axis must be positive or unlabeled");
    const SweepAxis axis = axis_name == "positive" ? SweepAxis::kPositive : SweepAxis::kUnlabeled;
    const auto grid = s.at("grid").get<std::vector<Eigen::Index>>();
    require(!grid.empty(), "sweep.grid must not be empty");
    const auto points = sweep_points(axis, grid, s.at("fixed").get<Eigen::Index>());
    const int trials = s.at("trials");
    const EstimatorConfig est = estimator_config(cfg);

    double truth = 0.0;
    std::vector<MseRow> rows;
    if (has_input(cfg)) {
        const LabeledDataset data = load_labeled(cfg.at("data").at("input").get<std::string>());
        LabeledSweep sweep = mse_sweep_labeled(data, prior, axis, points, trials,
                                               s.at("pool_size").get<Eigen::Index>(), est, seed);
        truth = sweep.truth;
        rows = std::move(sweep.rows);
    } else {
        const GaussianMixtureSpec spec = generator_spec(cfg.at("data").at("generator"), prior);
        truth = true_smi_quadrature(spec);
        rows = mse_sweep_gaussian(spec, truth, axis, points, trials, est, seed);
    }
    Output(cfg, "fig1-sweep").csv("fig1.csv", to_csv([&](std::ostream& o) { io::write_mse_csv(o, rows); }),
                                  Json{{"truth", truth}});
}

void cmd_purl_toy(const Json& cfg) {
    const std::uint64_t seed = cfg.at("seed");
    const ClassPrior prior = data_prior(cfg);
    const Json& d = cfg.at("data");
    require(!has_input(cfg), "purl-toy runs on a generator, not an input file");
    const GaussianMixtureSpec spec = generator_spec(d.at("generator"), prior);
    require(spec.dim() == 2, "purl-toy needs a 2-D generator");
    const PurlConfig purl = io::purl_config_from_json(cfg.at("purl"), PurlConfig::linear_toy(2));
    const ToyRun run =
        run_toy(spec, d.at("n_p").get<Eigen::Index>(), d.at("n_u").get<Eigen::Index>(), purl, seed, true);

    Output out(cfg, "purl-toy");
    out.json("purl_toy.json", Json{{"version", kVersion},
                                   {"purl_direction", io::to_json(run.purl_direction)},
                                   {"pca_direction", io::to_json(run.pca_direction)},
                                   {"purl_cos_e1", run.purl_cos_e1},
                                   {"pca_cos_e2", run.pca_cos_e2},
                                   {"smi_purl", run.smi_purl},
                                   {"smi_pca", run.smi_pca},
                                   {"best_iteration", run.purl.best_iteration}});
    out.csv("purl_toy_history.csv",
            to_csv([&](std::ostream& o) { io::write_history_csv(o, run.purl.history); }));

    const LabeledDataset eval =
        sample_gaussian_labeled(spec, cfg.at("purl_toy").at("eval_size").get<Eigen::Index>(), derive_seed(seed, 21));
    const Matrix z = transform(run.purl, eval.features);
    const Vector pca = eval.features * run.pca_direction;
    out.csv("purl_toy_projection.csv", to_csv([&](std::ostream& o) {
                o.precision(17);
                o << "label,x1,x2,purl,pca\n";
                for (Eigen::Index i = 0; i < eval.size(); ++i)
                    o << eval.labels[static_cast<std::size_t>(i)] << ',' << eval.features(i, 0) << ','
                      << eval.features(i, 1) << ',' << z(i, 0) << ',' << pca(i) << '\n';
            }));
}

/// Holds back the trailing `fraction` of both samples for early stopping.
std::pair<PuDataset, std::optional<PuDataset>> split_validation(const PuDataset& data, double fraction) {
    require(fraction >= 0.0 && fraction < 1.0, "purl_train.validation_fraction must lie in [0, 1)");
    const auto vp = static_cast<Eigen::Index>(fraction * static_cast<double>(data.n_p()));
    const auto vu = static_cast<Eigen::Index>(fraction * static_cast<double>(data.n_u()));
    if (vp == 0 || vu == 0) return {data, std::nullopt};
    return {PuDataset(data.positives.topRows(data.n_p() - vp), data.unlabeled.topRows(data.n_u() - vu)),
            PuDataset(data.positives.bottomRows(vp), data.unlabeled.bottomRows(vu))};
}

void cmd_purl_train(const Json& cfg) {
    const std::uint64_t seed = cfg.at("seed");
    const PuDataset all = load_pu(cfg, seed);
    const Json& t = cfg.at("purl_train");
    const auto preset = t.at("preset").get<std::string>();
    PurlConfig base;
    if (preset == "deep" || (preset == "auto" && all.dim() > 20))
        base = PurlConfig::deep(all.dim());
    else if (preset == "linear" || preset == "auto")
        base = PurlConfig::linear_toy(all.dim());
    else
        throw ConfigError("purl_train.preset must be auto, deep or linear");
    PurlConfig purl = io::purl_config_from_json(cfg.at("purl"), base);
    auto [train, validation] = split_validation(all, t.at("validation_fraction").get<double>());
    purl.validation = std::move(validation);
    const PurlResult r = train_purl(train, purl, derive_seed(seed, 14));

    Output out(cfg, "purl-train");
    out.json("purl_model.json", Json{{"version", kVersion},
                                     {"config", io::to_json(purl)},
                                     {"v", io::to_json(r.v_params)},
                                     {"w", io::to_json(r.w_params)},
                                     {"best_iteration", r.best_iteration},
                                     {"w_updates", r.w_updates},
                                     {"v_updates", r.v_updates}});
    out.csv("purl_history.csv", to_csv([&](std::ostream& o) { io::write_history_csv(o, r.history); }));
}

void cmd_puit(const Json& cfg) {
    const std::uint64_t seed = cfg.at("seed");
    const ClassPrior prior(cfg.at("prior").get<double>());
    const PuDataset data = load_pu(cfg, seed);
    const PermTestResult r =
        permutation_test(data, prior, estimator_config(cfg), test_options(cfg.at("test")), derive_seed(seed, 13));
    Json doc = io::to_json(r);
    doc["version"] = kVersion;
    Output(cfg, "puit").json("puit.json", doc);
    std::cout << "observed " << r.observed << " p_value " << r.p_value << "\n";
}

void cmd_type2_sweep(const Json& cfg) {
    const std::uint64_t seed = cfg.at("seed");
    const ClassPrior prior = data_prior(cfg);
    require(!has_input(cfg), "type2-sweep runs on a generator, not an input file");
    const Json& t = cfg.at("type2");
    Type2Config c;
    c.n_p_grid = t.at("n_p_grid").get<std::vector<Eigen::Index>>();
    c.n_u_grid = t.at("n_u_grid").get<std::vector<Eigen::Index>>();
    c.level = t.at("level");
    c.trials = t.at("trials");
    c.test = test_options(cfg.at("test"));
    c.estimator = estimator_config(cfg);
    const auto rows = type2_experiment(generator_spec(cfg.at("data").at("generator"), prior), c, seed);
    Output(cfg, "type2-sweep").csv("type2.csv", to_csv([&](std::ostream& o) { io::write_type2_csv(o, rows); }));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PU-SMI estimation, representation learning and independence testing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Flags flags;
    const std::vector<std::pair<std::string, void (*)(const Json&)>> commands{
        {"estimate", cmd_estimate},         {"fig1-sweep", cmd_fig1_sweep}, {"purl-toy", cmd_purl_toy},
        {"purl-train", cmd_purl_train},     {"puit", cmd_puit},             {"type2-sweep", cmd_type2_sweep},
    };
    const std::vector<std::string> help{
        "Estimate PU-SMI with cross-validated hyperparameters",
        "Squared error of the estimate against the truth over a sample-size grid",
        "Linear PURL vs PCA on a 2-D generator",
        "Train a PURL map and ratio head on PU data",
        "Permutation independence test from PU data",
        "Type-II error frequency of the independence test over a size grid",
    };
    for (std::size_t i = 0; i < commands.size(); ++i) {
        CLI::App* sub = app.add_subcommand(commands[i].first, help[i]);
        sub->add_option("--config", flags.config, "JSON config; flags override its fields")->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "Master seed");
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--threads", flags.threads, "OpenMP threads (0 = runtime default)");
        sub->add_option("--prior", flags.prior, "Class prior thetaP in (0, 1)");
        sub->add_option("--data-prior", flags.data_prior, "Class prior used to draw the PU sample");
        sub->add_option("--input", flags.input,
                        "Labelled file (.csv, else LIBSVM; d is the largest feature index seen)");
        sub->add_option("--generator", flags.generator, "Synthetic source: toy or null");
        sub->add_option("--n-p", flags.n_p, "Positive sample size");
        sub->add_option("--n-u", flags.n_u, "Unlabelled sample size");
        sub->add_option("--trials", flags.trials, "Monte Carlo trials per grid point");
        sub->add_option("--b-count", flags.b_count, "Permutation rounds");
        sub->add_flag("--recv-per-round", flags.recv_per_round, "Re-run cross-validation in every permutation round");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const Json cfg = effective_config(flags);
        kernels::set_threads(cfg.at("threads").get<int>());
        for (const auto& [name, run] : commands)
            if (app.got_subcommand(name)) run(cfg);
        return kExitOk;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
