// modgrok: numerical workbench for two-layer quadratic networks on modular
// addition. Subcommands generate datasets, train with plain/normalized GD
// under l-inf regularization, build analytic Fourier solutions, analyze
// empirical NTKs, evaluate closed-form bounds, and check permutation
// equivariance.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "modgrok/bounds.hpp"
#include "modgrok/dataset.hpp"
#include "modgrok/equivariance.hpp"
#include "modgrok/fourier.hpp"
#include "modgrok/kernels.hpp"
#include "modgrok/ntk.hpp"
#include "modgrok/permutation.hpp"
#include "modgrok/quadnet.hpp"
#include "modgrok/rng.hpp"
#include "modgrok/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << "\n";
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// run.json keeps the only timestamps so every other artifact stays
// byte-reproducible
void write_run_metadata(const fs::path& dir, const std::string& command, std::uint64_t seed,
                        const json& config, double elapsed_s) {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char ts[64];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    json j = {{"schema_version", kSchemaVersion},
              {"command", command},
              {"seed", seed},
              {"config_hash", fnv1a(config.dump())},
              {"timestamp_utc", ts},
              {"elapsed_seconds", elapsed_s},
              {"backend", mg::kern::active().name},
              {"version", kVersion}};
    write_json_file(dir / "run.json", j);
}

// --- config plumbing --------------------------------------------------------

struct ExperimentConfig {
    std::string task = "classification";
    int p = 31;
    int h = 0;   // 0 -> 4p
    long n = 0;  // 0 -> task default sample size
    double lr = 10.0;
    long steps = 100000;
    double lambda_inf = 1e-20;
    double init_scale = 1.0;
    bool normalized = true;
    std::uint64_t seed = 1;
    long entk_probe_every = 0;
    int entk_probe_points = 0;
    std::string preset;
};

long default_n(const std::string& task, int p) {
    double expo = task == "regression" ? 2.25 : 5.0 / 3.0;
    return (long)std::ceil(2.0 * std::pow(double(p), expo));
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    auto parse_p = [&](const std::string& prefix) {
        return std::stoi(name.substr(prefix.size()));
    };
    if (name.rfind("regression-p", 0) == 0) {
        c.task = "regression";
        c.p = parse_p("regression-p");
        c.lr = 1.0;
        c.lambda_inf = 1e-4;
        c.normalized = false;
        c.steps = 50000;
        c.entk_probe_every = 500;
    } else if (name.rfind("classification-p", 0) == 0) {
        c.task = "classification";
        c.p = parse_p("classification-p");
        c.lr = 10.0;
        c.lambda_inf = 1e-20;
        c.normalized = true;
        c.steps = 100000;
        c.entk_probe_every = 500;
        if (c.p == 31) {
            // calibrated fast-grokking fallback: stronger l-inf pull keeps the
            // normalized-GD margin phase alive in double precision
            c.lambda_inf = 3e-3;
            c.steps = 40000;
        }
    } else if (name == "small-init-sweep") {
        c.task = "regression";
        c.p = 47;
        c.lr = 1.0;
        c.lambda_inf = 1e-4;
        c.normalized = false;
        // horizon calibrated to the window where the large-init run has already
        // memorized its sampled triples but the small-init run is still climbing
        c.steps = 2000;
        c.entk_probe_every = 0;
    } else {
        throw CLI::ValidationError("unknown preset: " + name);
    }
    c.h = 4 * c.p;
    c.n = default_n(c.task, c.p);
    return c;
}

// strict minimal TOML: `key = value` lines, #-comments, no tables
json parse_flat_toml(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j = json::object();
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) continue;
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
            j[key] = val.substr(1, val.size() - 2);
        else if (val == "true" || val == "false")
            j[key] = (val == "true");
        else if (val.find_first_of(".eE") != std::string::npos)
            j[key] = std::stod(val);
        else
            j[key] = std::stoll(val);
    }
    return j;
}

json load_config_file(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") return parse_flat_toml(path);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    in >> j;
    return j;
}

void apply_config_json(ExperimentConfig& c, const json& j) {
    if (j.contains("preset")) c = preset_config(j.at("preset").get<std::string>());
    if (j.contains("task")) c.task = j.at("task").get<std::string>();
    if (j.contains("p")) c.p = j.at("p").get<int>();
    if (j.contains("h")) c.h = j.at("h").get<int>();
    if (j.contains("n")) c.n = j.at("n").get<long>();
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("steps")) c.steps = j.at("steps").get<long>();
    if (j.contains("lambda_inf")) c.lambda_inf = j.at("lambda_inf").get<double>();
    if (j.contains("init_scale")) c.init_scale = j.at("init_scale").get<double>();
    if (j.contains("normalized")) c.normalized = j.at("normalized").get<bool>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("entk_probe_every")) c.entk_probe_every = j.at("entk_probe_every").get<long>();
    if (j.contains("entk_probe_points")) c.entk_probe_points = j.at("entk_probe_points").get<int>();
    if (j.contains("init_scheme") && j.at("init_scheme").get<std::string>() != "uniform_fan_in")
        throw std::invalid_argument("unknown init_scheme");
    if (j.contains("loss")) {
        std::string l = j.at("loss").get<std::string>();
        if (l == "square") c.task = "regression";
        else if (l == "cross_entropy") c.task = "classification";
        else throw std::invalid_argument("unknown loss: " + l);
    }
}

json config_to_json(const ExperimentConfig& c) {
    json j = {{"task", c.task},
              {"p", c.p},
              {"h", c.h > 0 ? c.h : 4 * c.p},
              {"n", c.n > 0 ? c.n : default_n(c.task, c.p)},
              {"lr", c.lr},
              {"steps", c.steps},
              {"lambda_inf", c.lambda_inf},
              {"init_scale", c.init_scale},
              {"init_scheme", "uniform_fan_in"},
              {"loss", c.task == "regression" ? "square" : "cross_entropy"},
              {"normalized", c.normalized},
              {"seed", c.seed},
              {"entk_probe_every", c.entk_probe_every},
              {"entk_probe_points", c.entk_probe_points}};
    if (!c.preset.empty()) j["preset"] = c.preset;
    return j;
}

mg::TrainConfig to_train_config(const ExperimentConfig& c) {
    mg::TrainConfig tc;
    tc.p = c.p;
    tc.h = c.h > 0 ? c.h : 4 * c.p;
    tc.lr = c.lr;
    tc.steps = c.steps;
    tc.lambda_inf = c.lambda_inf;
    tc.init_scale = c.init_scale;
    tc.loss = c.task == "regression" ? mg::LossKind::Square : mg::LossKind::CrossEntropy;
    tc.normalized = c.normalized;
    tc.seed = c.seed;
    tc.entk_probe_every = c.entk_probe_every;
    tc.entk_probe_points = c.entk_probe_points;
    return tc;
}

mg::TaskKind task_kind(const std::string& task) {
    if (task == "regression") return mg::TaskKind::Regression;
    if (task == "classification") return mg::TaskKind::Classification;
    throw std::invalid_argument("unknown task: " + task);
}

std::pair<mg::ModAddDataset, mg::ModAddDataset> make_split(const ExperimentConfig& c) {
    mg::ModAddDataset pop = mg::gen_full_population(c.p, task_kind(c.task));
    long n = c.n > 0 ? c.n : default_n(c.task, c.p);
    // the task-default formula overshoots tiny populations; keep a test point
    if (c.n <= 0 && n >= long(pop.size())) n = long(pop.size()) - 1;
    return mg::sample_split(pop, std::size_t(n), c.seed);
}

json grok_to_json(const mg::GrokSignature& g) {
    json j = {{"t1", g.t1}, {"t2", g.t2}};
    auto put = [&](const char* key, double v) {
        if (std::isfinite(v)) j[key] = v;
        else j[key] = nullptr;
    };
    put("entk_drift_pre_t1", g.drift_pre);
    put("entk_drift_post_t1", g.drift_post);
    put("drift_ratio", g.drift_post / g.drift_pre);
    return j;
}

json final_metrics_json(const mg::TrainResult& res) {
    const mg::MetricsRow& r = res.metrics.back();
    return {{"step", r.step},           {"train_loss", r.train_loss}, {"test_loss", r.test_loss},
            {"train_acc", r.train_acc}, {"test_acc", r.test_acc},     {"linf_norm", r.linf_norm}};
}

int finish_train_outputs(const fs::path& out, const ExperimentConfig& cfg,
                         const mg::TrainResult& res, const mg::ModAddDataset& train_ds) {
    mg::write_metrics_csv((out / "metrics.csv").string(), res.metrics);
    mg::save_checkpoint(res.theta, train_ds.task, (out / "checkpoint").string());
    json report = {{"schema_version", kSchemaVersion},
                   {"config", config_to_json(cfg)},
                   {"final", final_metrics_json(res)},
                   {"aborted", res.aborted}};
    if (res.aborted) report["abort_step"] = res.abort_step;
    if (cfg.entk_probe_every > 0) report["grok"] = grok_to_json(res.grok);
    write_json_file(out / "report.json", report);
    if (res.aborted) {
        const mg::MetricsRow& r = res.metrics.back();
        std::cerr << "numerical abort at step " << r.step << ": train_loss=" << r.train_loss
                  << " grad_l2=" << r.grad_l2 << " linf_norm=" << r.linf_norm << "\n";
        return kExitNumerical;
    }
    return 0;
}

// --- subcommands -------------------------------------------------------------

int cmd_gen_data(const std::string& task, int p, long n, std::uint64_t seed,
                 const fs::path& out) {
    fs::create_directories(out);
    auto t0 = std::chrono::steady_clock::now();
    mg::ModAddDataset pop = mg::gen_full_population(p, task_kind(task));
    json cfg = {{"task", task}, {"p", p}, {"n", n}, {"seed", seed}};
    if (n <= 0) {
        mg::save_csv(pop, (out / "population.csv").string());
        std::cout << "wrote " << pop.size() << " points to population.csv\n";
    } else {
        auto [train, test] = mg::sample_split(pop, std::size_t(n), seed);
        mg::save_csv(train, (out / "train.csv").string());
        mg::save_csv(test, (out / "test.csv").string());
        std::cout << "wrote " << train.size() << " train / " << test.size() << " test points\n";
    }
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_metadata(out, "gen-data", seed, cfg, el);
    return 0;
}

int cmd_construct(int p, const std::string& variant, double scale, int h_target, bool verify,
                  const fs::path& out) {
    fs::create_directories(out);
    auto t0 = std::chrono::steady_clock::now();
    if (variant != "4p" && variant != "8p")
        throw CLI::ValidationError("variant must be 8p or 4p");
    mg::ConstructionSpec spec;
    spec.p = p;
    spec.output_scale = scale;
    spec.variant =
        variant == "4p" ? mg::ConstructionVariant::FourP : mg::ConstructionVariant::EightP;
    mg::QuadNetParams theta = mg::build_construction(spec);
    if (h_target > 0) theta = mg::duplicate_shrink(theta, h_target);

    json report = {{"schema_version", kSchemaVersion},
                   {"p", p},
                   {"variant", variant},
                   {"output_scale", scale},
                   {"h", theta.h}};
    if (verify) {
        mg::ModAddDataset pop = mg::gen_full_population(p, mg::TaskKind::Classification);
        double max_dev = 0.0;
        std::vector<double> logits(p);
        for (const mg::DataPoint& pt : pop.points) {
            mg::forward_logits(theta, pt.a, pt.b, logits.data());
            for (int c = 0; c < p; ++c) {
                double want = (c == pt.c) ? 4.0 * p * scale : 0.0;
                max_dev = std::max(max_dev, std::abs(logits[c] - want));
            }
        }
        mg::MarginReport mr = mg::margin(theta, pop);
        mg::EvalMetrics em = mg::eval_metrics(theta, pop, mg::LossKind::CrossEntropy);
        report["max_logit_deviation"] = max_dev;
        report["margin"] = mr.q_min;
        report["classification_acc"] = em.acc;
        std::cout << "h=" << theta.h << " margin=" << mr.q_min
                  << " max-logit-deviation=" << max_dev << "\n";
    } else {
        std::cout << "h=" << theta.h << "\n";
    }
    mg::save_checkpoint(theta, mg::TaskKind::Classification, (out / "checkpoint").string());
    write_json_file(out / "report.json", report);
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_metadata(out, "construct", 0, report, el);
    return 0;
}

int cmd_train(const ExperimentConfig& cfg, const fs::path& out, const char* command) {
    fs::create_directories(out);
    auto t0 = std::chrono::steady_clock::now();
    auto [train_ds, test_ds] = make_split(cfg);
    mg::TrainResult res = mg::train(to_train_config(cfg), train_ds, test_ds);
    int rc = finish_train_outputs(out, cfg, res, train_ds);
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_metadata(out, command, cfg.seed, config_to_json(cfg), el);
    return rc;
}

// same-seed/same-data init-scale sweep; reports the max train-test accuracy gap
// per scale
int cmd_sweep(const ExperimentConfig& base, const std::vector<double>& alphas,
              const fs::path& out) {
    fs::create_directories(out);
    auto t0 = std::chrono::steady_clock::now();
    auto [train_ds, test_ds] = make_split(base);
    json runs = json::array();
    for (double alpha : alphas) {
        ExperimentConfig cfg = base;
        cfg.init_scale = alpha;
        mg::TrainResult res = mg::train(to_train_config(cfg), train_ds, test_ds);
        double max_gap = 0.0;
        for (const mg::MetricsRow& r : res.metrics)
            max_gap = std::max(max_gap, r.train_acc - r.test_acc);
        std::ostringstream name;
        name << "metrics_alpha" << alpha << ".csv";
        mg::write_metrics_csv((out / name.str()).string(), res.metrics);
        runs.push_back({{"init_scale", alpha},
                        {"max_train_test_acc_gap", max_gap},
                        {"final", final_metrics_json(res)},
                        {"aborted", res.aborted},
                        {"metrics_csv", name.str()}});
        std::cout << "alpha=" << alpha << " max_acc_gap=" << max_gap << "\n";
    }
    json report = {{"schema_version", kSchemaVersion},
                   {"config", config_to_json(base)},
                   {"alphas", alphas},
                   {"runs", runs}};
    write_json_file(out / "report.json", report);
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_metadata(out, "grok-run", base.seed, config_to_json(base), el);
    return 0;
}

int cmd_ntk_analyze(const std::string& checkpoint, const ExperimentConfig& cfg, long points,
                    double delta, const fs::path& out) {
    fs::create_directories(out);
    auto t0 = std::chrono::steady_clock::now();

    mg::QuadNetParams theta;
    mg::TaskKind task;
    std::string source;
    if (!checkpoint.empty()) {
        auto loaded = mg::load_checkpoint(checkpoint);
        theta = std::move(loaded.first);
        task = loaded.second;
        source = checkpoint;
    } else {
        task = task_kind(cfg.task);
        mg::TrainConfig tc = to_train_config(cfg);
        theta = mg::init_params(tc.p, tc.h, tc);
        source = "init(seed=" + std::to_string(cfg.seed) + ")";
    }

    mg::ModAddDataset pop = mg::gen_full_population(theta.p, task);
    long n = points > 0 ? points : cfg.n;
    if (n <= 0 || n > long(pop.size())) n = long(pop.size());
    mg::ModAddDataset ds = pop;
    if (n < long(pop.size())) {
        auto split = mg::sample_split(pop, std::size_t(n), cfg.seed);
        ds = std::move(split.first);
    }

    mg::KernelMatrix k = mg::entk_for_task(theta, ds.points, task);
    mg::EigDiagnostics eig = mg::eig_diagnostics(k);

    std::vector<double> y(ds.size());
    std::vector<double> prior(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const mg::DataPoint& pt = ds.points[i];
        y[i] = pt.label;
        prior[i] = task == mg::TaskKind::Regression ? mg::forward_reg(theta, pt.a, pt.b, pt.c)
                                                    : mg::forward_reg(theta, pt.a, pt.b, 0);
    }
    mg::RidgelessFit fit = mg::kernel_ridgeless_fit(k, y, &prior);

    long rho = mg::rho_c_of(ds);
    mg::ThresholdReport thr = mg::interpolation_thresholds(theta.p, n, theta.h, rho, delta);

    mg::save_kernel_matrix(k, (out / "kernel").string(), theta.p, theta.h, source);
    json report = {{"schema_version", kSchemaVersion},
                   {"source", source},
                   {"task", mg::task_name(task)},
                   {"p", theta.p},
                   {"h", theta.h},
                   {"n", n},
                   {"min_eig", eig.min_eig},
                   {"max_eig", eig.max_eig},
                   {"rank", eig.rank},
                   {"eig_cutoff", eig.cutoff},
                   {"ridgeless_residual_inf", fit.residual_inf},
                   {"ridgeless_residual_l2", fit.residual_l2},
                   {"rho_c", rho},
                   {"delta", delta},
                   {"h_sufficient_threshold", thr.h_sufficient},
                   {"h_impossible_threshold", thr.h_impossible},
                   {"sufficient", thr.sufficient},
                   {"impossible", thr.impossible}};
    write_json_file(out / "report.json", report);
    std::cout << "n=" << n << " min_eig=" << eig.min_eig << " rank=" << eig.rank
              << " residual_inf=" << fit.residual_inf << "\n";
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_metadata(out, "ntk-analyze", cfg.seed, report, el);
    return 0;
}

int cmd_bounds(int p, int m, double n, int h, double r, double rp, double gamma, double delta,
               double l2, double c_const, const fs::path& out) {
    fs::create_directories(out);
    auto t0 = std::chrono::steady_clock::now();
    if (h <= 0) h = 8 * p;
    if (gamma <= 0) gamma = 4.0 * p;
    json reports = json::array();
    auto add = [&](const std::string& name, const json& inputs, double value) {
        reports.push_back({{"name", name}, {"inputs", inputs}, {"value", value}});
    };

    for (int d = 0; d <= m; ++d) add("c_d", {{"p", p}, {"d", d}}, mg::c_d(p, d));
    add("top_eig_sum_bound", {{"p", p}, {"m", m}, {"n", n}}, mg::top_eig_sum_bound(p, m, long(n)));
    add("kernel_lower_bound_rhs", {{"p", p}, {"m", m}, {"n", n}},
        mg::kernel_lower_bound_rhs(p, m, n));
    add("kernel_lower_bound_rhs_classification", {{"p", p}, {"n", n}},
        mg::kernel_lower_bound_rhs_classification(p, n));
    add("lower_bound_zero_crossing", {{"p", p}, {"m", m}}, mg::lower_bound_zero_crossing(p, m));
    long nn = n > 0 ? long(n) : 1000;
    add("rademacher_bound", {{"r", r}, {"r_prime", rp}, {"h", h}, {"p", p}, {"n", nn}},
        mg::rademacher_bound(r, rp, h, p, nn));
    add("regression_gen_bound",
        {{"R", r}, {"h", h}, {"p", p}, {"n", nn}, {"delta", delta}, {"C", c_const}},
        mg::regression_gen_bound(r, h, p, nn, delta, c_const));
    if (nn >= 2) {
        mg::ClassGenBound cb = mg::classification_gen_bound(gamma, r, h, p, nn, delta);
        reports.push_back({{"name", "classification_gen_bound"},
                           {"inputs",
                            {{"gamma", gamma},
                             {"r", r},
                             {"h", h},
                             {"p", p},
                             {"n", nn},
                             {"delta", delta},
                             {"delta1", delta}}},
                           {"value", cb.value},
                           {"regime", cb.regime_star ? "*" : "**"},
                           {"simplified", cb.simplified}});
    }
    if (l2 >= 0) add("misclass_from_l2", {{"l2", l2}, {"p", p}}, mg::misclass_from_l2(l2, p));

    json top = {{"schema_version", kSchemaVersion}, {"reports", reports}};
    write_json_file(out / "report.json", top);
    std::cout << top.dump(2) << "\n";
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_metadata(out, "bounds", 0, top, el);
    return 0;
}

int cmd_equi_check(int p, int h, long steps, const std::string& task, double lr,
                   std::uint64_t seed, const fs::path& out) {
    fs::create_directories(out);
    auto t0 = std::chrono::steady_clock::now();

    mg::RngStream rs = mg::stream(seed, "equi.sigma");
    mg::PermTriple sigma = mg::random_perm_triple(rs, p);

    mg::TrainConfig tc;
    tc.p = p;
    tc.h = h > 0 ? h : 4 * p;
    tc.steps = steps;
    tc.seed = seed;
    if (task == "regression") {
        tc.loss = mg::LossKind::Square;
        tc.lr = lr > 0 ? lr : 0.05;
        tc.lambda_inf = 0.0;
        tc.normalized = false;
    } else {
        tc.loss = mg::LossKind::CrossEntropy;
        tc.lr = lr > 0 ? lr : 0.1;
        tc.lambda_inf = 1e-20;
        tc.normalized = true;
    }

    mg::QuadNetParams theta = mg::init_params(p, tc.h, tc);
    std::vector<mg::DataPoint> pts = mg::random_triples(p, 200, seed);
    double fwd = mg::check_forward_equivariance(theta, sigma, pts);
    double grad = mg::check_gradient_equivariance(theta, sigma, pts);

    mg::ModAddDataset pop = mg::gen_full_population(p, task_kind(task));
    auto [train_ds, test_ds] = mg::sample_split(pop, pop.size() / 2, seed);
    std::vector<double> traj = mg::check_training_equivariance(tc, sigma, train_ds);
    double traj_max = traj.empty() ? 0.0 : *std::max_element(traj.begin(), traj.end());

    json report = {{"schema_version", kSchemaVersion},
                   {"p", p},
                   {"h", tc.h},
                   {"steps", steps},
                   {"task", task},
                   {"seed", seed},
                   {"max_forward_dev", fwd},
                   {"max_grad_dev", grad},
                   {"max_trajectory_dev", traj_max},
                   {"per_step_traj_dev", traj}};
    write_json_file(out / "report.json", report);
    std::cout << "forward_dev=" << fwd << " grad_dev=" << grad << " traj_dev=" << traj_max
              << "\n";
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_metadata(out, "equi-check", seed, report, el);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"modular-addition quadratic-network workbench"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    // keep -h free for the width option
    app.set_help_flag("--help", "print help");
    auto sub = [&](const char* name, const char* desc) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->set_help_flag("--help", "print help");
        s->fallthrough();  // --out/--seed/--config may follow the subcommand
        return s;
    };

    std::string out_dir = "out";
    std::string config_path;
    std::uint64_t seed = 1;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--config", config_path, "JSON or flat-TOML config file");
    auto* seed_opt = app.add_option("--seed", seed, "top-level RNG seed");

    // gen-data
    auto* gen = sub("gen-data", "enumerate or sample a dataset");
    std::string gd_task = "classification";
    int gd_p = 7;
    long gd_n = 0;
    gen->add_option("--task", gd_task, "regression|classification")->capture_default_str();
    gen->add_option("--p", gd_p, "modulus")->capture_default_str();
    gen->add_option("--n", gd_n, "train sample size (0 = full population)")
        ->capture_default_str();

    // construct
    auto* con = sub("construct", "build the analytic Fourier solution");
    int c_p = 5, c_htarget = 0;
    std::string c_variant = "8p";
    double c_scale = 1.0;
    bool c_verify = false;
    con->add_option("--p", c_p, "odd modulus")->capture_default_str();
    con->add_option("--variant", c_variant, "8p|4p")->capture_default_str();
    con->add_option("--scale", c_scale, "output scale (multiplies V)")->capture_default_str();
    con->add_option("--h-target", c_htarget, "duplicate+shrink to this width");
    con->add_flag("--verify", c_verify, "check all logits, margin, accuracy");

    // shared training options for train / grok-run
    ExperimentConfig xc;
    auto add_train_opts = [&](CLI::App* sc) {
        sc->add_option("--preset", xc.preset,
                       "regression-pXX | classification-pXX | small-init-sweep");
        sc->add_option("--task", xc.task, "regression|classification");
        sc->add_option("--p", xc.p, "modulus");
        sc->add_option("--h", xc.h, "width (0 = 4p)");
        sc->add_option("--n", xc.n, "train sample size (0 = task default)");
        sc->add_option("--lr", xc.lr, "learning rate");
        sc->add_option("--steps", xc.steps, "GD steps");
        sc->add_option("--lambda", xc.lambda_inf, "l-inf regularization strength");
        sc->add_option("--alpha", xc.init_scale, "init scale");
        sc->add_option("--normalized", xc.normalized, "normalized GD (true/false)");
        sc->add_option("--probe-every", xc.entk_probe_every, "eNTK drift cadence (0 = off)");
        sc->add_option("--probe-points", xc.entk_probe_points, "eNTK probe set size");
    };
    auto* tr = sub("train", "full-batch GD training run");
    add_train_opts(tr);
    auto* gr = sub("grok-run", "preset experiment with grokking diagnostics");
    add_train_opts(gr);
    std::vector<double> sweep_alphas{0.1, 1.0};
    gr->add_option("--alphas", sweep_alphas, "init scales for small-init-sweep");

    // ntk-analyze
    auto* nt = sub("ntk-analyze", "eNTK spectrum and ridgeless fit");
    std::string nt_checkpoint;
    long nt_points = 0;
    double nt_delta = 0.1;
    nt->add_option("--checkpoint", nt_checkpoint, "checkpoint base path (no extension)");
    nt->add_option("--task", xc.task, "regression|classification (fresh init)");
    nt->add_option("--p", xc.p, "modulus (fresh init)");
    nt->add_option("--h", xc.h, "width (fresh init, 0 = 4p)");
    nt->add_option("--alpha", xc.init_scale, "init scale (fresh init)");
    nt->add_option("--points", nt_points, "kernel points (0 = full population)");
    nt->add_option("--delta", nt_delta, "threshold confidence parameter");

    // bounds
    auto* bo = sub("bounds", "closed-form bound evaluations");
    int b_p = 5, b_m = 3, b_h = 0;
    double b_n = 0, b_r = 1.0, b_rp = 1.0, b_gamma = 0, b_delta = 0.1, b_l2 = -1, b_c = 1.0;
    bo->add_option("--p", b_p, "modulus")->capture_default_str();
    bo->add_option("--m", b_m, "summand count")->capture_default_str();
    bo->add_option("--n", b_n, "sample size")->capture_default_str();
    bo->add_option("--h", b_h, "width (0 = 8p)");
    bo->add_option("--r", b_r, "first-layer norm bound")->capture_default_str();
    bo->add_option("--rp", b_rp, "second-layer norm bound")->capture_default_str();
    bo->add_option("--gamma", b_gamma, "margin (0 = 4p)");
    bo->add_option("--delta", b_delta, "confidence")->capture_default_str();
    bo->add_option("--l2", b_l2, "mean square loss for misclass bound (-1 = skip)");
    bo->add_option("--C", b_c, "unspecified-constant knob")->capture_default_str();

    // equi-check
    auto* eq = sub("equi-check", "permutation equivariance certification");
    int e_p = 5, e_h = 0;
    long e_steps = 100;
    std::string e_task = "classification";
    eq->add_option("--p", e_p, "modulus")->capture_default_str();
    eq->add_option("--h", e_h, "width (0 = 4p)");
    eq->add_option("--steps", e_steps, "paired trajectory length")->capture_default_str();
    eq->add_option("--task", e_task, "regression|classification")->capture_default_str();
    double e_lr = 0;
    eq->add_option("--lr", e_lr, "learning rate (0 = task default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (!config_path.empty()) apply_config_json(xc, load_config_file(config_path));
        if ((*tr || *gr) && !xc.preset.empty()) {
            // preset provides the base; file and explicit flags override it
            ExperimentConfig merged = preset_config(xc.preset);
            if (!config_path.empty()) apply_config_json(merged, load_config_file(config_path));
            CLI::App* sc = *tr ? tr : gr;
            auto passed = [&](const std::string& flag) { return sc->count(flag) > 0; };
            if (passed("--task")) merged.task = xc.task;
            if (passed("--p")) merged.p = xc.p;
            if (passed("--h")) merged.h = xc.h;
            if (passed("--n")) merged.n = xc.n;
            if (passed("--lr")) merged.lr = xc.lr;
            if (passed("--steps")) merged.steps = xc.steps;
            if (passed("--lambda")) merged.lambda_inf = xc.lambda_inf;
            if (passed("--alpha")) merged.init_scale = xc.init_scale;
            if (passed("--normalized")) merged.normalized = xc.normalized;
            if (passed("--probe-every")) merged.entk_probe_every = xc.entk_probe_every;
            if (passed("--probe-points")) merged.entk_probe_points = xc.entk_probe_points;
            merged.seed = xc.seed;
            merged.preset = xc.preset;
            xc = merged;
        }
        if (seed_opt->count() > 0) xc.seed = seed;

        fs::path out(out_dir);
        if (*gen) return cmd_gen_data(gd_task, gd_p, gd_n, xc.seed, out);
        if (*con) return cmd_construct(c_p, c_variant, c_scale, c_htarget, c_verify, out);
        if (*tr) return cmd_train(xc, out, "train");
        if (*gr) {
            if (xc.preset == "small-init-sweep") return cmd_sweep(xc, sweep_alphas, out);
            return cmd_train(xc, out, "grok-run");
        }
        if (*nt) return cmd_ntk_analyze(nt_checkpoint, xc, nt_points, nt_delta, out);
        if (*bo)
            return cmd_bounds(b_p, b_m, b_n, b_h, b_r, b_rp, b_gamma, b_delta, b_l2, b_c, out);
        if (*eq) return cmd_equi_check(e_p, e_h, e_steps, e_task, e_lr, xc.seed, out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
