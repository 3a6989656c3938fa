#include "amagold/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "amagold/errors.hpp"
#include "text_format.hpp"

namespace amagold {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::run: return "run";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::tune: return "tune";
    case ExperimentKind::stationarity: return "stationarity";
    case ExperimentKind::oracle: return "oracle";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view text) noexcept {
  for (const auto kind : {ExperimentKind::run, ExperimentKind::sweep, ExperimentKind::tune,
                          ExperimentKind::stationarity, ExperimentKind::oracle}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

SamplerConfig ExperimentConfig::sampler_config() const {
  SamplerConfig c;
  c.step_size = epsilon;
  c.friction = beta;
  c.momentum_variance = sigma2;
  c.inner_steps = inner_steps;
  c.resample_momentum = resample;
  if (minibatch > 0) c.minibatch_size = minibatch;
  return effective_config(sampler, c);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

const std::set<std::string> kModels = {"doublewell", "dist1", "dist2", "logreg"};

bool synthetic(const std::string& model) { return model != "logreg"; }

std::size_t model_dimension(const std::string& model) { return model == "doublewell" ? 1 : 2; }

void check_step(std::vector<std::string>& problems, const std::string& field, double eps,
                double beta) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    problems.push_back(field + ": step size must be positive");
  } else if (!(eps * beta < 1.0)) {
    problems.push_back(field + ": epsilon * beta must be below 1");
  }
}

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  const std::string& model = c.model.name;
  if (model.empty()) {
    problems.push_back("model: a model selector is required (--model)");
  } else if (!kModels.count(model)) {
    problems.push_back("model: unknown model '" + model + "'");
  }
  if (model == "logreg") {
    if (c.model.dataset.empty()) {
      problems.push_back("dataset: logreg needs a dataset file (--dataset)");
    } else if (!fs::is_regular_file(c.model.dataset)) {
      problems.push_back("dataset: file not found: " + c.model.dataset);
    }
    if (!(c.model.prior_variance > 0.0)) problems.push_back("prior_variance: must be positive");
  } else if (!model.empty()) {
    if (c.minibatch > 0) problems.push_back("minibatch: only applies to the logreg model");
    if (!c.model.dataset.empty()) problems.push_back("dataset: only applies to the logreg model");
  }
  if (!(c.model.gradient_noise >= 0.0) || !std::isfinite(c.model.gradient_noise)) {
    problems.push_back("gradient_noise: must be non-negative");
  }
  if (!(c.model.dist1_variance > 0.0)) problems.push_back("dist1_variance: must be positive");

  check_step(problems, "epsilon", c.epsilon, c.beta);
  if (!(c.beta >= 0.0) || !std::isfinite(c.beta)) problems.push_back("beta: must be non-negative");
  if (!(c.sigma2 > 0.0) || !std::isfinite(c.sigma2)) problems.push_back("sigma2: must be positive");
  if (c.inner_steps < 1) problems.push_back("inner_steps: must be at least 1");
  if (c.rounds < 1) problems.push_back("rounds: must be positive");
  if (c.burn_in >= c.rounds) problems.push_back("burn_in: must be smaller than rounds");

  if (c.experiment == ExperimentKind::sweep) {
    if (c.epsilon_grid.empty()) problems.push_back("epsilon_grid: sweep needs at least one value");
    for (std::size_t i = 0; i < c.epsilon_grid.size(); ++i) {
      check_step(problems, "epsilon_grid[" + std::to_string(i) + "]", c.epsilon_grid[i], c.beta);
      if (i > 0 && !(c.epsilon_grid[i] > c.epsilon_grid[i - 1])) {
        problems.push_back("epsilon_grid: values must be strictly increasing");
      }
    }
  }
  if (c.experiment == ExperimentKind::tune) {
    if (!(c.target_accept > 0.0 && c.target_accept < 1.0)) {
      problems.push_back("target_accept: must lie in (0, 1)");
    }
    if (c.tune_window < 1) problems.push_back("tune_window: must be at least 1");
    if (c.burn_in < c.tune_window) problems.push_back("burn_in: tuning needs at least one window");
    if (!(c.tune_gain > 0.0)) problems.push_back("tune_gain: must be positive");
  }
  if (c.experiment == ExperimentKind::stationarity) {
    if (model == "logreg") problems.push_back("model: stationarity needs a synthetic model");
    if (c.walkers < 2) problems.push_back("walkers: need at least 2");
    if (c.walker_rounds < 1) problems.push_back("walker_rounds: must be at least 1");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) problems.push_back("alpha: must lie in (0, 1)");
  }
  if (c.experiment == ExperimentKind::oracle && model != "logreg") {
    problems.push_back("model: the oracle experiment needs the logreg model");
  }
  if (!c.reference.empty() && c.experiment != ExperimentKind::oracle &&
      !fs::is_regular_file(c.reference)) {
    problems.push_back("reference: file not found: " + c.reference);
  }
  if (!c.bins.empty()) {
    if (!model.empty() && synthetic(model) && kModels.count(model) &&
        c.bins.size() != model_dimension(model)) {
      problems.push_back("bins: expected one count per model dimension");
    }
    for (const auto b : c.bins) {
      if (b < 2) {
        problems.push_back("bins: each count must be at least 2");
        break;
      }
    }
  }
  if (c.out.empty()) problems.push_back("out: output directory is required");
  return problems;
}

// ---------------------------------------------------------------------------
// JSON config

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = std::string(to_string(c.experiment));
  j["sampler"] = std::string(to_string(c.sampler));
  j["model"] = c.model.name;
  j["dataset"] = c.model.dataset;
  j["gradient_noise"] = c.model.gradient_noise;
  j["dist1_variance"] = c.model.dist1_variance;
  j["prior_variance"] = c.model.prior_variance;
  j["standardize"] = c.model.standardize;
  j["intercept"] = c.model.intercept;
  j["epsilon"] = c.epsilon;
  j["beta"] = c.beta;
  j["sigma2"] = c.sigma2;
  j["inner_steps"] = c.inner_steps;
  j["resample"] = c.resample ? "on" : "off";
  j["minibatch"] = c.minibatch;
  j["epsilon_grid"] = c.epsilon_grid;
  j["rounds"] = c.rounds;
  j["burn_in"] = c.burn_in;
  j["seed"] = c.seed;
  j["bins"] = c.bins;
  j["target_accept"] = c.target_accept;
  j["tune_window"] = c.tune_window;
  j["tune_gain"] = c.tune_gain;
  j["walkers"] = c.walkers;
  j["walker_rounds"] = c.walker_rounds;
  j["alpha"] = c.alpha;
  j["reference"] = c.reference;
  j["out"] = c.out;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

namespace {

template <class T>
void read_key(const json& j, const char* key, T& out, std::vector<std::string>& problems) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    problems.push_back(std::string(key) + ": wrong type in config file");
  }
}

bool parse_switch(const std::string& text, bool& out) {
  if (text == "on") {
    out = true;
    return true;
  }
  if (text == "off") {
    out = false;
    return true;
  }
  return false;
}

void apply_json(const json& j, ExperimentConfig& c, std::vector<std::string>& problems) {
  static const std::set<std::string> known = {
      "experiment", "sampler", "model", "dataset", "gradient_noise", "dist1_variance",
      "prior_variance", "standardize", "intercept", "epsilon", "beta", "sigma2", "inner_steps",
      "resample", "minibatch", "epsilon_grid", "rounds", "burn_in", "seed", "bins",
      "target_accept", "tune_window", "tune_gain", "walkers", "walker_rounds", "alpha",
      "reference", "out", "threads"};
  if (!j.is_object()) {
    problems.push_back("config: top level must be an object");
    return;
  }
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) problems.push_back(key + ": unknown config key");
  }
  std::string text;
  if (j.contains("experiment")) {
    read_key(j, "experiment", text, problems);
    if (auto k = parse_experiment_kind(text)) {
      c.experiment = *k;
    } else {
      problems.push_back("experiment: unknown kind '" + text + "'");
    }
  }
  if (j.contains("sampler")) {
    read_key(j, "sampler", text, problems);
    if (auto k = parse_sampler_kind(text)) {
      c.sampler = *k;
    } else {
      problems.push_back("sampler: unknown sampler '" + text + "'");
    }
  }
  if (j.contains("resample")) {
    const json& r = j.at("resample");
    if (r.is_boolean()) {
      c.resample = r.get<bool>();
    } else if (!r.is_string() || !parse_switch(r.get<std::string>(), c.resample)) {
      problems.push_back("resample: expected on or off");
    }
  }
  read_key(j, "model", c.model.name, problems);
  read_key(j, "dataset", c.model.dataset, problems);
  read_key(j, "gradient_noise", c.model.gradient_noise, problems);
  read_key(j, "dist1_variance", c.model.dist1_variance, problems);
  read_key(j, "prior_variance", c.model.prior_variance, problems);
  read_key(j, "standardize", c.model.standardize, problems);
  read_key(j, "intercept", c.model.intercept, problems);
  read_key(j, "epsilon", c.epsilon, problems);
  read_key(j, "beta", c.beta, problems);
  read_key(j, "sigma2", c.sigma2, problems);
  read_key(j, "inner_steps", c.inner_steps, problems);
  read_key(j, "minibatch", c.minibatch, problems);
  read_key(j, "epsilon_grid", c.epsilon_grid, problems);
  read_key(j, "rounds", c.rounds, problems);
  read_key(j, "burn_in", c.burn_in, problems);
  read_key(j, "seed", c.seed, problems);
  read_key(j, "bins", c.bins, problems);
  read_key(j, "target_accept", c.target_accept, problems);
  read_key(j, "tune_window", c.tune_window, problems);
  read_key(j, "tune_gain", c.tune_gain, problems);
  read_key(j, "walkers", c.walkers, problems);
  read_key(j, "walker_rounds", c.walker_rounds, problems);
  read_key(j, "alpha", c.alpha, problems);
  read_key(j, "reference", c.reference, problems);
  read_key(j, "out", c.out, problems);
  read_key(j, "threads", c.threads, problems);
}

json parse_json_text(const std::string& text, std::vector<std::string>& problems) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    problems.push_back(std::string("config: not valid JSON: ") + e.what());
    return json::object();
  }
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  std::vector<std::string> problems;
  ExperimentConfig c;
  apply_json(parse_json_text(text, problems), c, problems);
  if (!problems.empty()) throw UsageError(std::move(problems));
  return c;
}

// ---------------------------------------------------------------------------
// Command line

CliCommand parse_args(int argc, const char* const* argv) {
  CLI::App app{"AMAGOLD and baseline stochastic-gradient MCMC experiments", "amagold"};
  app.set_help_flag("-h,--help", "Show this help and exit");

  std::optional<std::string> config_path, experiment, sampler, model, dataset, resample, out,
      reference;
  std::optional<double> epsilon, beta, sigma2, target_accept, gradient_noise, alpha;
  std::optional<std::size_t> inner_steps, rounds, burn_in, minibatch, walkers, walker_rounds,
      tune_window, threads;
  std::optional<std::uint64_t> seed;
  std::vector<double> epsilon_grid;
  std::vector<std::size_t> bins;
  bool print_config = false;

  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--experiment", experiment, "run | sweep | tune | stationarity | oracle");
  app.add_option("--sampler", sampler, "amagold | amagold-skew | sghmc | hmc | l2mc");
  app.add_option("--model", model, "doublewell | dist1 | dist2 | logreg");
  app.add_option("--dataset", dataset, "Dataset file for logreg");
  app.add_option("--epsilon", epsilon, "Step size");
  app.add_option("--beta", beta, "Friction");
  app.add_option("--sigma2", sigma2, "Momentum variance");
  app.add_option("--inner-steps", inner_steps, "Leapfrog steps per round (T)");
  app.add_option("--rounds", rounds, "Total rounds including burn-in");
  app.add_option("--burn-in", burn_in, "Discarded initial rounds");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--minibatch", minibatch, "Minibatch size for logreg (0 = full batch)");
  app.add_option("--resample", resample, "Momentum resampling: on | off");
  app.add_option("--target-accept", target_accept, "Tuner target acceptance");
  app.add_option("--out", out, "Output directory");
  app.add_flag("--print-config", print_config, "Print the resolved config and exit");
  app.add_option("--epsilon-grid", epsilon_grid, "Sweep step sizes, comma separated")->delimiter(',');
  app.add_option("--gradient-noise", gradient_noise, "Stddev of simulated gradient noise");
  app.add_option("--bins", bins, "Histogram bins per dimension, comma separated")->delimiter(',');
  app.add_option("--reference", reference, "Reference posterior mean file");
  app.add_option("--walkers", walkers, "Stationarity walkers");
  app.add_option("--walker-rounds", walker_rounds, "Rounds per stationarity walker");
  app.add_option("--alpha", alpha, "KS significance level");
  app.add_option("--tune-window", tune_window, "Rounds per tuning window");
  app.add_option("--threads", threads, "Sweep workers (0 = all cores)");

  CliCommand cmd;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    cmd.help = app.help();
    return cmd;
  } catch (const CLI::ParseError& e) {
    throw UsageError({e.what()});
  }

  std::vector<std::string> problems;
  ExperimentConfig& c = cmd.config;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) {
      problems.push_back("config: cannot read " + *config_path);
    } else {
      std::stringstream ss;
      ss << in.rdbuf();
      apply_json(parse_json_text(ss.str(), problems), c, problems);
    }
  }
  if (experiment) {
    if (auto k = parse_experiment_kind(*experiment)) {
      c.experiment = *k;
    } else {
      problems.push_back("experiment: unknown kind '" + *experiment + "'");
    }
  }
  if (sampler) {
    if (auto k = parse_sampler_kind(*sampler)) {
      c.sampler = *k;
    } else {
      problems.push_back("sampler: unknown sampler '" + *sampler + "'");
    }
  }
  if (resample && !parse_switch(*resample, c.resample)) {
    problems.push_back("resample: expected on or off, got '" + *resample + "'");
  }
  if (model) c.model.name = *model;
  if (dataset) c.model.dataset = *dataset;
  if (gradient_noise) c.model.gradient_noise = *gradient_noise;
  if (epsilon) c.epsilon = *epsilon;
  if (beta) c.beta = *beta;
  if (sigma2) c.sigma2 = *sigma2;
  if (inner_steps) c.inner_steps = *inner_steps;
  if (rounds) c.rounds = *rounds;
  if (burn_in) c.burn_in = *burn_in;
  if (seed) c.seed = *seed;
  if (minibatch) c.minibatch = *minibatch;
  if (target_accept) c.target_accept = *target_accept;
  if (out) c.out = *out;
  if (reference) c.reference = *reference;
  if (walkers) c.walkers = *walkers;
  if (walker_rounds) c.walker_rounds = *walker_rounds;
  if (alpha) c.alpha = *alpha;
  if (tune_window) c.tune_window = *tune_window;
  if (threads) c.threads = *threads;
  if (!epsilon_grid.empty()) c.epsilon_grid = epsilon_grid;
  if (!bins.empty()) c.bins = bins;

  for (auto& p : validate(c)) problems.push_back(std::move(p));
  if (!problems.empty()) throw UsageError(std::move(problems));
  cmd.print_config = print_config;
  return cmd;
}

// ---------------------------------------------------------------------------
// Models and grids

ModelPtr build_model(const ModelSpec& spec, std::size_t minibatch) {
  ModelPtr base;
  if (spec.name == "doublewell") {
    base = std::make_shared<DoubleWell>();
  } else if (spec.name == "dist1") {
    base = std::make_shared<BananaDist1>(spec.dist1_variance);
  } else if (spec.name == "dist2") {
    base = std::make_shared<CrossMixtureDist2>();
  } else if (spec.name == "logreg") {
    DatasetOptions options{spec.standardize, spec.intercept};
    auto data = std::make_shared<const Dataset>(load_dataset(spec.dataset, options));
    return std::make_shared<LogisticRegression>(std::move(data), minibatch, spec.prior_variance);
  } else {
    throw ConfigurationError("unknown model '" + spec.name + "'");
  }
  if (spec.gradient_noise > 0.0) {
    return std::make_shared<GaussianNoiseGradient>(std::move(base), spec.gradient_noise);
  }
  return base;
}

GridSpec default_grid(const std::string& model, const std::vector<std::size_t>& bins) {
  GridSpec g;
  if (model == "doublewell") {
    g.bounds = {Vector::Constant(1, -5.0), Vector::Constant(1, 4.0)};
    g.bins = {900};
  } else if (model == "dist1") {
    g.bounds = {(Vector(2) << -4.0, -8.0).finished(), (Vector(2) << 8.0, 8.0).finished()};
    g.bins = {100, 100};
  } else if (model == "dist2") {
    g.bounds = {Vector::Constant(2, -6.0), Vector::Constant(2, 6.0)};
    g.bins = {100, 100};
  } else {
    throw ConfigurationError("no density grid for model '" + model + "'");
  }
  if (!bins.empty()) {
    if (bins.size() != g.bins.size()) throw ConfigurationError("bins do not match model dimension");
    g.bins = bins;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string preprocessing_note(const ExperimentConfig& c) {
  if (c.model.name != "logreg") return "none";
  return std::string("standardize=") + (c.model.standardize ? "on" : "off") +
         " intercept=" + (c.model.intercept ? "on" : "off");
}

RunReport base_report(const ExperimentConfig& c) {
  RunReport r;
  r.config = json::parse(config_to_json(c)).dump();
  r.experiment = std::string(to_string(c.experiment));
  r.sampler = std::string(to_string(c.sampler));
  r.model = c.model.name;
  r.seed = c.seed;
  r.rounds = c.rounds;
  r.burn_in = c.burn_in;
  r.step_size = c.epsilon;
  r.preprocessing = preprocessing_note(c);
  r.reference_path = c.reference;
  return r;
}

// Fills KL / MSE / mean metrics for a finished chain.
void chain_metrics(const ExperimentConfig& c, const Matrix& samples, RunReport& r) {
  const Vector mean = samples.colwise().mean().transpose();
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    r.metrics["mean_" + std::to_string(i)] = mean[i];
  }
  if (synthetic(c.model.name)) {
    const GridSpec g = default_grid(c.model.name, c.bins);
    const ModelPtr exact = build_model({c.model.name, "", 0.0, c.model.dist1_variance}, 0);
    const GridDensity target = analytic_density(*exact, g.bounds, g.bins);
    const HistogramResult h = histogram_density(samples, g.bounds, g.bins);
    r.metrics["kl"] = symmetric_kl(h.density, target);
    r.metrics["spilled"] = static_cast<double>(h.spilled);
  } else if (!c.reference.empty()) {
    r.metrics["mse"] = parameter_mse(mean, read_vector(c.reference));
  }
}

RunReport do_run(const ExperimentConfig& c, bool write_chain) {
  RunReport r = base_report(c);
  const ModelPtr model = build_model(c.model, c.minibatch);
  const SampleSet chain =
      run_chain(c.sampler, c.sampler_config(), *model, c.rounds, c.burn_in, c.seed);
  r.set_stats(chain.stats);
  chain_metrics(c, chain.samples, r);
  if (write_chain) {
    const std::string path = (fs::path(c.out) / "samples.csv").string();
    write_samples(chain, path);
    r.outputs["samples"] = path;
  }
  return r;
}

RunReport do_sweep(const ExperimentConfig& c) {
  RunReport summary = base_report(c);
  const std::size_t n = c.epsilon_grid.size();
  std::vector<RunReport> reports(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      ExperimentConfig point = c;
      point.experiment = ExperimentKind::run;
      point.epsilon = c.epsilon_grid[i];
      point.seed = derive_seed(c.seed, i);
      point.out = (fs::path(c.out) / ("eps_" + std::to_string(i))).string();
      try {
        fs::create_directories(point.out);
        reports[i] = do_run(point, false);
        write_run_report(reports[i], (fs::path(point.out) / "report.json").string());
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::size_t workers = c.threads == 0 ? std::thread::hardware_concurrency() : c.threads;
  workers = std::clamp<std::size_t>(workers, 1, n);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) throw Error("sweep point epsilon=" + detail::format_double(c.epsilon_grid[i]) + ": " + errors[i]);
  }
  const std::string metric = synthetic(c.model.name) ? "kl" : (c.reference.empty() ? "" : "mse");
  std::string csv = "epsilon," + (metric.empty() ? std::string("mean_0") : metric) +
                    ",acceptance_rate,numerical_failures\n";
  for (std::size_t i = 0; i < n; ++i) {
    const RunReport& r = reports[i];
    const double value = r.metrics.at(metric.empty() ? "mean_0" : metric);
    csv += detail::format_double(c.epsilon_grid[i]) + "," + detail::format_double(value) + "," +
           detail::format_double(r.acceptance_rate) + "," + std::to_string(r.numerical_failures) +
           "\n";
    summary.metrics[(metric.empty() ? "mean_0" : metric) + "@" + detail::format_double(c.epsilon_grid[i])] = value;
    summary.accepted += r.accepted;
    summary.rejected += r.rejected;
    summary.out_of_domain += r.out_of_domain;
    summary.numerical_failures += r.numerical_failures;
    summary.outputs["report_" + std::to_string(i)] =
        (fs::path(c.out) / ("eps_" + std::to_string(i)) / "report.json").string();
  }
  const auto total = summary.accepted + summary.rejected + summary.out_of_domain;
  summary.acceptance_rate = total == 0 ? 0.0 : static_cast<double>(summary.accepted) / static_cast<double>(total);
  const std::string path = (fs::path(c.out) / "summary.csv").string();
  write_text_file(path, csv);
  summary.outputs["summary"] = path;
  return summary;
}

RunReport do_tune(const ExperimentConfig& c) {
  RunReport r = base_report(c);
  const ModelPtr model = build_model(c.model, c.minibatch);
  const SamplerConfig cfg = c.sampler_config();
  TunerSchedule schedule;
  schedule.target_acceptance = c.target_accept;
  schedule.window = c.tune_window;
  schedule.gain = c.tune_gain;
  schedule.total_rounds = c.burn_in;

  const Vector origin = Vector::Zero(static_cast<Eigen::Index>(model->dimension()));
  const std::string trace_path = (fs::path(c.out) / "trace.csv").string();
  TuningResult tuned;
  try {
    tuned = tune_step_size(c.sampler, cfg, *model, schedule, initial_state(origin, cfg, c.seed), c.seed);
  } catch (const TuningFailure& e) {
    write_tuning_trace(e.trace(), trace_path);
    r.outputs["trace"] = trace_path;
    throw;
  }
  write_tuning_trace(tuned.trace, trace_path);
  r.outputs["trace"] = trace_path;

  SamplerConfig frozen = cfg;
  frozen.step_size = tuned.step_size;
  const std::size_t keep = c.rounds - c.burn_in;
  std::vector<std::uint64_t> rounds;
  Matrix samples(static_cast<Eigen::Index>(keep), static_cast<Eigen::Index>(model->dimension()));
  RoundStats stats;
  PhaseState state = tuned.final_state;
  for (std::size_t k = 0; k < keep; ++k) {
    const std::size_t round = c.burn_in + k;
    RandomStream rng = RandomStream::derive(c.seed, round);
    RoundResult res = run_round(c.sampler, frozen, state, *model, rng);
    stats.add(res.record);
    state = std::move(res.state);
    samples.row(static_cast<Eigen::Index>(k)) = state.position.transpose();
    rounds.push_back(round);
  }
  r.set_stats(stats);
  r.step_size = tuned.step_size;
  r.metrics["final_epsilon"] = tuned.step_size;
  const std::size_t tail = std::min<std::size_t>(5, tuned.trace.size());
  double acc = 0.0;
  for (std::size_t i = tuned.trace.size() - tail; i < tuned.trace.size(); ++i) acc += tuned.trace[i].acceptance;
  r.metrics["tail_acceptance"] = tail == 0 ? 0.0 : acc / static_cast<double>(tail);
  chain_metrics(c, samples, r);
  const std::string path = (fs::path(c.out) / "samples.csv").string();
  write_samples(rounds, samples, path);
  r.outputs["samples"] = path;
  return r;
}

RunReport do_stationarity(const ExperimentConfig& c) {
  RunReport r = base_report(c);
  r.rounds = c.walker_rounds;
  r.burn_in = 0;
  const ModelPtr model = build_model(c.model, 0);
  const GridSpec g = default_grid(c.model.name, c.bins);
  const ModelPtr exact_model = build_model({c.model.name, "", 0.0, c.model.dist1_variance}, 0);
  const GridDensity exact = analytic_density(*exact_model, g.bounds, g.bins);
  const StationarityResult s = stationarity_check(c.sampler, c.sampler_config(), *model, exact,
                                                  c.walkers, c.walker_rounds, c.alpha, c.seed);
  r.metrics["ks_statistic"] = s.ks.statistic;
  r.metrics["ks_critical_value"] = s.ks.critical_value;
  r.metrics["pass"] = s.ks.reject ? 0.0 : 1.0;
  const std::string path = (fs::path(c.out) / "walkers.csv").string();
  std::vector<std::uint64_t> idx(static_cast<std::size_t>(s.final.rows()));
  std::iota(idx.begin(), idx.end(), std::uint64_t{0});
  write_samples(idx, s.final, path);
  r.outputs["walkers"] = path;
  return r;
}

RunReport do_oracle(const ExperimentConfig& c) {
  RunReport r = base_report(c);
  r.sampler = std::string(to_string(SamplerKind::l2mc));
  const ModelPtr model = build_model(c.model, 0);
  const SampleSet chain =
      run_chain(SamplerKind::l2mc, c.sampler_config(), *model, c.rounds, c.burn_in, c.seed);
  r.set_stats(chain.stats);
  const Vector mean = chain.samples.colwise().mean().transpose();
  for (Eigen::Index i = 0; i < mean.size(); ++i) r.metrics["mean_" + std::to_string(i)] = mean[i];
  const std::string path =
      c.reference.empty() ? (fs::path(c.out) / "reference.txt").string() : c.reference;
  write_vector(mean, path);
  r.reference_path = path;
  r.outputs["reference"] = path;
  return r;
}

}  // namespace

StationarityResult stationarity_check(SamplerKind kind, const SamplerConfig& config,
                                      const EnergyModel& model, const GridDensity& exact,
                                      std::size_t walkers, std::size_t rounds, double alpha,
                                      std::uint64_t seed) {
  if (walkers < 2 || rounds < 1) throw ContractViolation("stationarity needs walkers >= 2 and rounds >= 1");
  const SamplerConfig cfg = effective_config(kind, config);
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  RandomStream init_rng = RandomStream::derive(seed, kMax - 1);
  RandomStream ref_rng = RandomStream::derive(seed, kMax - 2);

  StationarityResult out;
  out.initial = sample_grid_density(exact, walkers, init_rng);
  const Matrix reference = sample_grid_density(exact, walkers, ref_rng);
  out.final.resize(out.initial.rows(), out.initial.cols());
  for (std::size_t w = 0; w < walkers; ++w) {
    const std::uint64_t walker_seed = derive_seed(seed, w);
    const Vector start = out.initial.row(static_cast<Eigen::Index>(w)).transpose();
    PhaseState state = initial_state(start, cfg, walker_seed);
    for (std::size_t k = 0; k < rounds; ++k) {
      RandomStream rng = RandomStream::derive(walker_seed, k);
      state = run_round(kind, cfg, state, model, rng).state;
    }
    out.final.row(static_cast<Eigen::Index>(w)) = state.position.transpose();
  }
  std::vector<double> a(out.final.col(0).data(), out.final.col(0).data() + out.final.rows());
  std::vector<double> b(reference.col(0).data(), reference.col(0).data() + reference.rows());
  out.ks = ks_two_sample(std::move(a), std::move(b), alpha);
  return out;
}

RunReport run_experiment(const ExperimentConfig& config) {
  if (auto problems = validate(config); !problems.empty()) throw UsageError(std::move(problems));
  const auto start = Clock::now();
  RunReport report;
  try {
    fs::create_directories(config.out);
    switch (config.experiment) {
      case ExperimentKind::run: report = do_run(config, true); break;
      case ExperimentKind::sweep: report = do_sweep(config); break;
      case ExperimentKind::tune: report = do_tune(config); break;
      case ExperimentKind::stationarity: report = do_stationarity(config); break;
      case ExperimentKind::oracle: report = do_oracle(config); break;
    }
  } catch (const std::exception& e) {
    report = base_report(config);
    report.complete = false;
    report.error = e.what();
  }
  report.wall_clock_seconds = seconds_since(start);
  const std::string path = (fs::path(config.out) / "report.json").string();
  report.outputs["report"] = path;
  try {
    write_run_report(report, path);
  } catch (const IoError& e) {
    if (report.complete) {
      report.complete = false;
      report.error = e.what();
    }
  }
  return report;
}

}  // namespace amagold
