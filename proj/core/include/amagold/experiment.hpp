#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amagold/dataio.hpp"
#include "amagold/diagnostics.hpp"
#include "amagold/energy_models.hpp"
#include "amagold/samplers.hpp"
#include "amagold/tuning.hpp"

namespace amagold {

enum class ExperimentKind { run, sweep, tune, stationarity, oracle };

std::string_view to_string(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> parse_experiment_kind(std::string_view text) noexcept;

struct ModelSpec {
  std::string name;             // doublewell | dist1 | dist2 | logreg
  std::string dataset;          // logreg only
  double gradient_noise = 0.0;  // stddev of simulated gradient noise (synthetic models)
  double dist1_variance = 4.0;
  double prior_variance = LogisticRegression::kDefaultPriorVariance;
  bool standardize = true;
  bool intercept = true;

  bool operator==(const ModelSpec&) const = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::run;
  SamplerKind sampler = SamplerKind::amagold;
  ModelSpec model;

  double epsilon = 0.1;
  double beta = 0.25;
  double sigma2 = 1.0;
  std::size_t inner_steps = 10;
  bool resample = true;
  std::size_t minibatch = 0;  // 0 = full batch

  std::vector<double> epsilon_grid;  // sweep
  std::size_t rounds = 100000;
  std::size_t burn_in = 10000;
  std::uint64_t seed = 1;

  // Histogram grid for KL; empty means the model's default.
  std::vector<std::size_t> bins;

  // tune
  double target_accept = 0.85;
  std::size_t tune_window = 200;
  double tune_gain = 0.5;

  // stationarity
  std::size_t walkers = 10000;
  std::size_t walker_rounds = 10;
  double alpha = 0.01;

  std::string reference;  // posterior-mean file for logreg MSE
  std::string out = "out";
  std::size_t threads = 0;  // sweep workers, 0 = hardware concurrency

  SamplerConfig sampler_config() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Every problem found, in field order; empty when valid.
std::vector<std::string> validate(const ExperimentConfig& config);

// Keys mirror the long flag names with '-' replaced by '_'.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

struct CliCommand {
  ExperimentConfig config;
  bool print_config = false;
  std::string help;  // non-empty when --help was requested
};

// Flags override values from --config. Throws UsageError listing every problem.
CliCommand parse_args(int argc, const char* const* argv);

ModelPtr build_model(const ModelSpec& spec, std::size_t minibatch);

struct GridSpec {
  Box bounds;
  std::vector<std::size_t> bins;
};

// Default KL grid for a synthetic model; overridden by `bins` when given.
GridSpec default_grid(const std::string& model, const std::vector<std::size_t>& bins = {});

// Runs the experiment and writes its artifacts under config.out. Runtime
// failures come back as a report with complete = false.
RunReport run_experiment(const ExperimentConfig& config);

// Stationarity check: walkers drawn from the grid density of `model`, each
// advanced `rounds` rounds from momentum ~ N(0, σ²I); first coordinate compared
// with fresh exact draws.
struct StationarityResult {
  KsResult ks;
  Matrix initial;
  Matrix final;
};

StationarityResult stationarity_check(SamplerKind kind, const SamplerConfig& config,
                                      const EnergyModel& model, const GridDensity& exact,
                                      std::size_t walkers, std::size_t rounds, double alpha,
                                      std::uint64_t seed);

}  // namespace amagold
