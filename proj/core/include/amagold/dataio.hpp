#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "amagold/energy_models.hpp"
#include "amagold/samplers.hpp"

namespace amagold {

struct DatasetOptions {
  bool standardize = false;
  bool intercept = false;
};

// Text format: one example per line, label first (±1 or 0/1), then either
// dense whitespace-separated values or 1-based index:value pairs. Lines
// starting with '#' and blank lines are skipped.
Dataset parse_dataset(const std::string& text, const DatasetOptions& options = {});
Dataset load_dataset(const std::string& path, const DatasetOptions& options = {});

// Per-column z-scores with an n-1 standard deviation; constant columns keep
// scale 1 and set the warning flag.
void standardize(Dataset& data);
void append_intercept(Dataset& data);

struct SampleTable {
  std::vector<std::uint64_t> rounds;
  Matrix values;
};

// Header "round,theta_0,...,theta_{d-1}"; values in shortest round-trip form.
void write_samples(const SampleSet& samples, const std::string& path);
void write_samples(const std::vector<std::uint64_t>& rounds, const Matrix& values,
                   const std::string& path);
SampleTable read_samples(const std::string& path);

struct RunReport {
  std::string config;  // canonical JSON of the resolved experiment config
  std::string experiment;
  std::string sampler;
  std::string model;
  std::uint64_t seed = 0;
  std::uint64_t rounds = 0;
  std::uint64_t burn_in = 0;
  double step_size = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t out_of_domain = 0;
  std::uint64_t numerical_failures = 0;
  double acceptance_rate = 0.0;
  double mean_acceptance_probability = 0.0;
  double wall_clock_seconds = 0.0;
  bool complete = true;
  std::string error;
  std::string preprocessing;
  std::string reference_path;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> outputs;

  void set_stats(const RoundStats& stats);
  bool operator==(const RunReport&) const = default;
};

std::string serialize_run_report(const RunReport& report);
RunReport parse_run_report(const std::string& text);
void write_run_report(const RunReport& report, const std::string& path);
RunReport read_run_report(const std::string& path);

// One value per line, shortest round-trip form.
void write_vector(const Vector& v, const std::string& path);
Vector read_vector(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace amagold
