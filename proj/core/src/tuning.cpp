#include "amagold/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "amagold/ama_core.hpp"
#include "text_format.hpp"

namespace amagold {

void TunerSchedule::validate() const {
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw ConfigurationError("target acceptance must lie in (0, 1)");
  }
  if (window < 1) throw ConfigurationError("adaptation window must be at least 1 round");
  if (!(gain > 0.0)) throw ConfigurationError("adaptation gain must be positive");
  if (!(min_step_size > 0.0 && min_step_size < max_step_size)) {
    throw ConfigurationError("step-size bounds must satisfy 0 < min < max");
  }
  if (total_rounds < window) throw ConfigurationError("tuning needs at least one full window");
}

double adapt_step_size(double step_size, double acceptance, const TunerSchedule& schedule) {
  const double next = step_size * std::exp(schedule.gain * (acceptance - schedule.target_acceptance));
  return std::clamp(next, schedule.min_step_size, schedule.max_step_size);
}

namespace {

double round_acceptance(const RoundRecord& record) {
  switch (record.outcome) {
    case RoundOutcome::unconditional:
      return 1.0;
    case RoundOutcome::accepted:
    case RoundOutcome::rejected:
      return record.log_accept ? acceptance_probability(*record.log_accept) : 0.0;
    default:
      return 0.0;
  }
}

}  // namespace

TuningResult tune_step_size(SamplerKind kind, const SamplerConfig& config, const EnergyModel& model,
                            const TunerSchedule& schedule, const PhaseState& start,
                            std::uint64_t seed) {
  schedule.validate();
  SamplerConfig cfg = effective_config(kind, config);
  cfg.step_size = std::clamp(cfg.step_size, schedule.min_step_size, schedule.max_step_size);
  cfg.validate();

  TuningResult result;
  PhaseState state = start;
  std::size_t round = 0;
  std::size_t stalled = 0;
  for (std::size_t w = 0; w < schedule.windows(); ++w) {
    double sum = 0.0;
    for (std::size_t k = 0; k < schedule.window; ++k, ++round) {
      RandomStream rng = RandomStream::derive(seed, round);
      RoundResult r = run_round(kind, cfg, state, model, rng);
      sum += round_acceptance(r.record);
      result.stats.add(r.record);
      state = std::move(r.state);
    }
    const double acceptance = sum / static_cast<double>(schedule.window);
    result.trace.push_back({w, cfg.step_size, acceptance, round});

    if (acceptance == 0.0 && cfg.step_size <= schedule.min_step_size) {
      if (++stalled >= kTuningStallWindows) {
        throw TuningFailure("acceptance stayed at 0 with the step size at its lower bound",
                            result.trace);
      }
    } else {
      stalled = 0;
    }
    cfg.step_size = adapt_step_size(cfg.step_size, acceptance, schedule);
  }
  result.step_size = cfg.step_size;
  result.final_state = std::move(state);
  return result;
}

void write_tuning_trace(const TuningTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open tuning trace for writing", path);
  out << "window,epsilon,acceptance\n";
  for (const auto& w : trace) {
    out << w.index << ',' << detail::format_double(w.step_size) << ','
        << detail::format_double(w.acceptance) << '\n';
  }
  if (!out) throw IoError("failed writing tuning trace", path);
}

}  // namespace amagold
