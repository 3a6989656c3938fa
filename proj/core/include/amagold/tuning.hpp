#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "amagold/energy_models.hpp"
#include "amagold/errors.hpp"
#include "amagold/random.hpp"
#include "amagold/samplers.hpp"

namespace amagold {

struct TunerSchedule {
  double target_acceptance = 0.85;
  std::size_t window = 200;  // rounds per adjustment
  double gain = 0.5;
  double min_step_size = 1e-6;
  double max_step_size = 1.0;
  std::size_t total_rounds = 10000;

  // Throws ConfigurationError on a broken invariant.
  void validate() const;
  std::size_t windows() const noexcept { return window == 0 ? 0 : total_rounds / window; }
};

struct TuningWindow {
  std::size_t index = 0;
  double step_size = 0.0;   // ε used throughout the window
  double acceptance = 0.0;  // mean min(1, a) over the window
  std::size_t end_round = 0;
};

using TuningTrace = std::vector<TuningWindow>;

// ε ← clamp(ε · exp(gain · (acceptance − target)), ε_min, ε_max)
double adapt_step_size(double step_size, double acceptance, const TunerSchedule& schedule);

struct TuningResult {
  double step_size = 0.0;  // frozen value for the sampling phase
  TuningTrace trace;
  PhaseState final_state;
  RoundStats stats;
};

class TuningFailure : public Error {
 public:
  TuningFailure(const std::string& what, TuningTrace trace)
      : Error(what), trace_(std::move(trace)) {}

  const TuningTrace& trace() const noexcept { return trace_; }

 private:
  TuningTrace trace_;
};

// Consecutive all-zero windows at ε_min before giving up.
inline constexpr std::size_t kTuningStallWindows = 3;

// Runs schedule.windows() windows of `kind` starting from config.step_size and
// `start`. Round k of the tuning phase uses derive(seed, k).
TuningResult tune_step_size(SamplerKind kind, const SamplerConfig& config, const EnergyModel& model,
                            const TunerSchedule& schedule, const PhaseState& start,
                            std::uint64_t seed);

// Header "window,epsilon,acceptance".
void write_tuning_trace(const TuningTrace& trace, const std::string& path);

}  // namespace amagold
