#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amagold/energy_models.hpp"
#include "amagold/phase_state.hpp"
#include "amagold/random.hpp"

namespace amagold {

// Axis-aligned box used as the parameter domain Θ.
struct Box {
  Vector lower;
  Vector upper;

  bool contains(const Vector& theta) const;
};

struct SamplerConfig {
  double step_size = 0.1;          // ε
  double momentum_variance = 1.0;  // σ²
  double friction = 0.25;          // β
  std::size_t inner_steps = 10;    // T
  bool resample_momentum = true;
  std::optional<Box> domain;                  // unconstrained when empty
  std::optional<std::size_t> minibatch_size;  // consumed when building dataset models

  // Throws ConfigurationError naming the first violated constraint
  // (ε > 0, σ² > 0, β >= 0, εβ < 1, T >= 1, well-formed box).
  void validate() const;

  double position_scale() const noexcept { return step_size / momentum_variance; }  // εσ⁻²
};

enum class SamplerKind { amagold, amagold_skew, sghmc, hmc, l2mc };

std::string_view to_string(SamplerKind kind) noexcept;
// Accepts the CLI spellings: amagold, amagold-skew, sghmc, hmc, l2mc.
std::optional<SamplerKind> parse_sampler_kind(std::string_view text) noexcept;

enum class RoundOutcome {
  pending,            // trajectory built, no decision yet
  accepted,
  rejected,
  out_of_domain,      // θ* outside Θ, handled as a rejection
  numerical_failure,  // non-finite value inside the round, handled as a rejection
  unconditional,      // SGHMC: no M-H step, proposal adopted
};

std::string_view to_string(RoundOutcome outcome) noexcept;

/// Full trace of one outer round.
///
/// AMAGOLD / HMC layout: positions θ_0..θ_T (θ_T = θ*), momenta
/// r_{-1/2}..r_{T-1/2}, noises and gradients for t = 0..T-1, and the energy
/// accumulator ρ_{-1/2}..ρ_{T-1/2}.
/// SGHMC layout: positions θ_0..θ_T, momenta r_{1/2}..r_{T+1/2}; ρ is empty.
struct RoundRecord {
  SamplerKind kind = SamplerKind::amagold;
  SamplerConfig config;

  PhaseState initial;  // state entering the round, before any resampling
  std::vector<Vector> positions;
  std::vector<Vector> momenta;
  std::vector<Vector> noises;
  std::vector<Vector> gradients;
  std::vector<GradientNoiseRecord> gradient_records;
  std::vector<double> rho;

  PhaseState proposal;
  double energy_initial = 0.0;
  double energy_proposal = 0.0;
  std::optional<double> log_accept;
  std::optional<double> uniform;
  RoundOutcome outcome = RoundOutcome::pending;
  std::optional<std::size_t> failed_step;

  // Start momentum after the optional resample (r_{-1/2}).
  const Vector& start_momentum() const { return momenta.front(); }
  double final_rho() const { return rho.empty() ? 0.0 : rho.back(); }
  bool complete() const;
};

struct RoundResult {
  PhaseState state;
  RoundRecord record;
};

// ---------------------------------------------------------------------------
// Single-step updates, exposed for property tests.

// r_{t+1/2} = ((1 - εβ) r_{t-1/2} - ε g + η) / (1 + εβ)
Vector amagold_momentum_step(const Vector& momentum, const Vector& gradient, const Vector& noise,
                             double step_size, double friction);

// ½ εσ⁻² gᵀ(r_{t-1/2} + r_{t+1/2})
double energy_increment(const Vector& gradient, const Vector& momentum_before,
                        const Vector& momentum_after, double position_scale);

// r_{t+1/2} = r_{t-1/2} - ε g - 2εβ r_{t-1/2} + η
Vector sghmc_momentum_step(const Vector& momentum, const Vector& gradient, const Vector& noise,
                           double step_size, double friction);

// H(θ, r) = U(θ) + ||r||² / (2σ²)
double hamiltonian(const EnergyModel& model, const PhaseState& state, double momentum_variance);

// ---------------------------------------------------------------------------
// Rounds. Every round splits its stream into purpose-specific sub-streams
// (momentum resample, injected noise, gradient noise, acceptance draw), so HMC
// and full-batch AMAGOLD see the same momentum and uniform draws.

// Builds the AMAGOLD trajectory and draws the acceptance uniform; no decision.
RoundRecord amagold_propose(const SamplerConfig& config, const PhaseState& state,
                            const EnergyModel& model, RandomStream& rng);

// Applies the M-H decision with the given uniform draw to a proposed round.
RoundResult resolve_round(RoundRecord record, double uniform);

RoundResult amagold_round(const SamplerConfig& config, const PhaseState& state,
                          const EnergyModel& model, RandomStream& rng);

RoundResult sghmc_round(const SamplerConfig& config, const PhaseState& state,
                        const EnergyModel& model, RandomStream& rng);

// Momentum is always resampled; exact gradients; acceptance from ΔH.
RoundResult hmc_round(const SamplerConfig& config, const PhaseState& state,
                      const EnergyModel& model, RandomStream& rng);

// Reverse trajectory started from (θ*, -r*) with the recorded stochastic
// samples in reverse order and the injected noise that maps it back onto the
// forward path. Its positions, momenta and ρ mirror the forward record.
RoundRecord replay_reverse(const RoundRecord& record, const EnergyModel& model);

// ---------------------------------------------------------------------------
// Chains

struct RoundStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;  // includes numerical failures
  std::uint64_t out_of_domain = 0;
  std::uint64_t numerical_failures = 0;
  double acceptance_probability_sum = 0.0;  // Σ min(1, a) over M-H rounds

  std::uint64_t total() const noexcept { return accepted + rejected + out_of_domain; }
  double acceptance_rate() const noexcept;
  void add(const RoundRecord& record);
};

struct SampleSet {
  Matrix samples;                    // one row per retained round
  std::vector<std::uint64_t> rounds;  // round index of each retained row
  RoundStats stats;
  SamplerKind kind = SamplerKind::amagold;
  SamplerConfig config;
  std::uint64_t seed = 0;
  PhaseState final_state;
};

// Effective configuration for a sampler kind: amagold forces momentum
// resampling, amagold-skew disables it, hmc always resamples.
SamplerConfig effective_config(SamplerKind kind, SamplerConfig config);

// One round of `kind`. l2mc runs AMAGOLD on exact gradients.
RoundResult run_round(SamplerKind kind, const SamplerConfig& config, const PhaseState& state,
                      const EnergyModel& model, RandomStream& rng);

// Momentum drawn from N(0, σ²I) on a dedicated sub-stream of `seed`.
PhaseState initial_state(const Vector& position, const SamplerConfig& config, std::uint64_t seed);

// Deterministic in (kind, config, model, rounds, burn_in, seed, start).
// Round i uses the sub-stream derive(seed, i). Starts at the origin unless a
// start position is given.
SampleSet run_chain(SamplerKind kind, const SamplerConfig& config, const EnergyModel& model,
                    std::size_t rounds, std::size_t burn_in, std::uint64_t seed,
                    std::optional<Vector> start = std::nullopt);

// ---------------------------------------------------------------------------
// (h, b) parameterization: v = εσ⁻² r, b = εβ, h = ε²σ⁻².

struct ReformulatedParams {
  double h;
  double b;
};

struct StandardParams {
  double step_size;
  double friction;
};

ReformulatedParams reparameterize(double step_size, double momentum_variance, double friction);
StandardParams restore_parameters(const ReformulatedParams& params, double momentum_variance);

struct ReformulatedState {
  Vector position;
  Vector velocity;  // v = εσ⁻² r
};

struct ReformulatedRound {
  ReformulatedState state;
  std::vector<Vector> positions;   // θ_0..θ_T
  std::vector<Vector> velocities;  // v_{-1/2}..v_{T-1/2}
  std::vector<double> rho;
  double log_accept = 0.0;
  RoundOutcome outcome = RoundOutcome::pending;
};

// One round of the velocity-form update. Consumes `rng` exactly like
// amagold_round, so both forms see the same standard-normal draws.
ReformulatedRound reformulated_amagold_round(const ReformulatedParams& params,
                                             std::size_t inner_steps, bool resample,
                                             const ReformulatedState& state,
                                             const EnergyModel& model, RandomStream& rng);

// ---------------------------------------------------------------------------
// The single stochastic-leapfrog step as a generic proposal kernel, for use
// with the amortized M-H machinery in ama_core.hpp.

class StochasticLeapfrogKernel {
 public:
  using State = PhaseState;
  using Noise = GradientNoiseRecord;

  StochasticLeapfrogKernel(const SamplerConfig& config, const EnergyModel& model);

  Noise draw_noise(const State& x, RandomStream& rng) const;
  State sample(const State& x, const Noise& zeta, RandomStream& rng) const;
  // Log density of the momentum move; -inf when y's position is not the
  // leapfrog image of (x, y.momentum).
  double log_density(const State& x, const State& y, const Noise& zeta) const;
  static bool is_finite(const State& x) { return x.is_finite(); }

  // log π(θ, r) = -H(θ, r)
  double log_target(const State& x) const;

 private:
  SamplerConfig config_;
  const EnergyModel* model_;
};

}  // namespace amagold
