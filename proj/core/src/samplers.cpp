#include "amagold/samplers.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "amagold/ama_core.hpp"
#include "amagold/errors.hpp"

namespace amagold {

// ---------------------------------------------------------------------------
// Configuration

bool Box::contains(const Vector& theta) const {
  if (theta.size() != lower.size()) return false;
  return (theta.array() >= lower.array()).all() && (theta.array() <= upper.array()).all();
}

void SamplerConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw ConfigurationError("step size must be positive and finite");
  }
  if (!(momentum_variance > 0.0) || !std::isfinite(momentum_variance)) {
    throw ConfigurationError("momentum variance must be positive and finite");
  }
  if (!(friction >= 0.0) || !std::isfinite(friction)) {
    throw ConfigurationError("friction must be non-negative and finite");
  }
  if (!(step_size * friction < 1.0)) {
    throw ConfigurationError("step size times friction must be below 1");
  }
  if (inner_steps < 1) throw ConfigurationError("inner steps must be at least 1");
  if (domain) {
    if (domain->lower.size() != domain->upper.size() || domain->lower.size() == 0) {
      throw ConfigurationError("domain bounds must be non-empty and of equal length");
    }
    if (!(domain->lower.array() < domain->upper.array()).all()) {
      throw ConfigurationError("domain lower bounds must be below upper bounds");
    }
  }
  if (minibatch_size && *minibatch_size == 0) {
    throw ConfigurationError("minibatch size must be positive");
  }
}

std::string_view to_string(SamplerKind kind) noexcept {
  switch (kind) {
    case SamplerKind::amagold: return "amagold";
    case SamplerKind::amagold_skew: return "amagold-skew";
    case SamplerKind::sghmc: return "sghmc";
    case SamplerKind::hmc: return "hmc";
    case SamplerKind::l2mc: return "l2mc";
  }
  return "unknown";
}

std::optional<SamplerKind> parse_sampler_kind(std::string_view text) noexcept {
  for (const auto kind : {SamplerKind::amagold, SamplerKind::amagold_skew, SamplerKind::sghmc,
                          SamplerKind::hmc, SamplerKind::l2mc}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(RoundOutcome outcome) noexcept {
  switch (outcome) {
    case RoundOutcome::pending: return "pending";
    case RoundOutcome::accepted: return "accepted";
    case RoundOutcome::rejected: return "rejected";
    case RoundOutcome::out_of_domain: return "out_of_domain";
    case RoundOutcome::numerical_failure: return "numerical_failure";
    case RoundOutcome::unconditional: return "unconditional";
  }
  return "unknown";
}

bool RoundRecord::complete() const {
  const std::size_t steps = config.inner_steps;
  return outcome != RoundOutcome::numerical_failure && positions.size() == steps + 1 &&
         momenta.size() == steps + 1 && noises.size() == steps && gradients.size() == steps &&
         gradient_records.size() == steps && rho.size() == steps + 1;
}

// ---------------------------------------------------------------------------
// Step primitives

Vector amagold_momentum_step(const Vector& momentum, const Vector& gradient, const Vector& noise,
                             double step_size, double friction) {
  const double damping = step_size * friction;
  return ((1.0 - damping) * momentum - step_size * gradient + noise) / (1.0 + damping);
}

double energy_increment(const Vector& gradient, const Vector& momentum_before,
                        const Vector& momentum_after, double position_scale) {
  return 0.5 * position_scale * gradient.dot(momentum_before + momentum_after);
}

Vector sghmc_momentum_step(const Vector& momentum, const Vector& gradient, const Vector& noise,
                           double step_size, double friction) {
  return momentum - step_size * gradient - 2.0 * step_size * friction * momentum + noise;
}

double hamiltonian(const EnergyModel& model, const PhaseState& state, double momentum_variance) {
  return model.potential(state.position) + 0.5 * state.momentum.squaredNorm() / momentum_variance;
}

namespace {

struct RoundStreams {
  RandomStream momentum;
  RandomStream injection;
  RandomStream gradient;
  RandomStream acceptance;

  explicit RoundStreams(RandomStream& parent)
      : momentum(parent.split()),
        injection(parent.split()),
        gradient(parent.split()),
        acceptance(parent.split()) {}
};

void check_inputs(const SamplerConfig& config, const PhaseState& state, const EnergyModel& model) {
  config.validate();
  if (static_cast<std::size_t>(state.position.size()) != model.dimension()) {
    throw ContractViolation("state dimension does not match the model");
  }
}

Vector start_momentum(const SamplerConfig& config, const PhaseState& state, RandomStream& stream) {
  if (config.resample_momentum) {
    return stream.normal_vector(state.position.size(), std::sqrt(config.momentum_variance));
  }
  if (state.momentum.size() != state.position.size()) {
    throw ContractViolation("momentum must be supplied when it is not resampled");
  }
  return state.momentum;
}

double injection_stddev(const SamplerConfig& config) {
  return std::sqrt(4.0 * config.step_size * config.friction * config.momentum_variance);
}

void mark_failure(RoundRecord& record, std::size_t step) {
  record.outcome = RoundOutcome::numerical_failure;
  record.failed_step = step;
}

}  // namespace

// ---------------------------------------------------------------------------
// AMAGOLD

RoundRecord amagold_propose(const SamplerConfig& config, const PhaseState& state,
                            const EnergyModel& model, RandomStream& rng) {
  check_inputs(config, state, model);
  RoundStreams streams(rng);

  const std::size_t steps = config.inner_steps;
  const double scale = config.position_scale();
  const double noise_sd = injection_stddev(config);

  RoundRecord rec;
  rec.kind = config.resample_momentum ? SamplerKind::amagold : SamplerKind::amagold_skew;
  rec.config = config;
  rec.initial = state;
  rec.positions.reserve(steps + 1);
  rec.momenta.reserve(steps + 1);
  rec.noises.reserve(steps);
  rec.gradients.reserve(steps);
  rec.gradient_records.reserve(steps);
  rec.rho.reserve(steps + 1);

  rec.momenta.push_back(start_momentum(config, state, streams.momentum));
  rec.rho.push_back(0.0);
  rec.positions.push_back(state.position + 0.5 * scale * rec.momenta.back());
  rec.uniform = streams.acceptance.uniform();

  for (std::size_t t = 0; t < steps; ++t) {
    if (t != 0) rec.positions.push_back(rec.positions.back() + scale * rec.momenta.back());
    const Vector& theta = rec.positions.back();
    if (!theta.allFinite()) {
      mark_failure(rec, t);
      return rec;
    }
    Vector eta = streams.injection.normal_vector(theta.size(), noise_sd);
    StochasticGradient sg = model.stochastic_gradient(theta, streams.gradient);
    Vector next = amagold_momentum_step(rec.momenta.back(), sg.gradient, eta, config.step_size,
                                        config.friction);
    const double rho_next =
        rec.rho.back() + energy_increment(sg.gradient, rec.momenta.back(), next, scale);
    rec.noises.push_back(std::move(eta));
    rec.gradients.push_back(std::move(sg.gradient));
    rec.gradient_records.push_back(std::move(sg.record));
    rec.momenta.push_back(std::move(next));
    rec.rho.push_back(rho_next);
    if (!rec.momenta.back().allFinite() || !std::isfinite(rho_next)) {
      mark_failure(rec, t);
      return rec;
    }
  }
  rec.positions.push_back(rec.positions.back() + 0.5 * scale * rec.momenta.back());
  rec.proposal = {rec.positions.back(), rec.momenta.back()};
  if (!rec.proposal.position.allFinite()) {
    mark_failure(rec, steps);
    return rec;
  }

  rec.energy_initial = model.potential(state.position);
  if (config.domain && !config.domain->contains(rec.proposal.position)) {
    rec.outcome = RoundOutcome::out_of_domain;
    return rec;
  }
  rec.energy_proposal = model.potential(rec.proposal.position);
  const double log_a = rec.energy_initial - rec.energy_proposal + rec.rho.back();
  if (!std::isfinite(log_a)) {
    mark_failure(rec, steps);
    return rec;
  }
  rec.log_accept = log_a;
  return rec;
}

RoundResult resolve_round(RoundRecord record, double uniform) {
  record.uniform = uniform;
  const Vector& theta = record.initial.position;
  // Rejection branch: keep θ, reverse the starting momentum.
  auto rejected = [&]() { return PhaseState{theta, -record.start_momentum()}; };

  if (record.momenta.empty()) throw ContractViolation("round record has no trajectory");
  if (record.outcome == RoundOutcome::numerical_failure ||
      record.outcome == RoundOutcome::out_of_domain) {
    PhaseState next = rejected();
    return {std::move(next), std::move(record)};
  }
  if (!record.log_accept) throw ContractViolation("round record has no acceptance ratio");
  if (metropolis_accept(*record.log_accept, uniform)) {
    record.outcome = RoundOutcome::accepted;
    PhaseState next = record.proposal;
    return {std::move(next), std::move(record)};
  }
  record.outcome = RoundOutcome::rejected;
  PhaseState next = rejected();
  return {std::move(next), std::move(record)};
}

RoundResult amagold_round(const SamplerConfig& config, const PhaseState& state,
                          const EnergyModel& model, RandomStream& rng) {
  RoundRecord record = amagold_propose(config, state, model, rng);
  const double u = *record.uniform;
  return resolve_round(std::move(record), u);
}

// ---------------------------------------------------------------------------
// SGHMC (no M-H step)

RoundResult sghmc_round(const SamplerConfig& config, const PhaseState& state,
                        const EnergyModel& model, RandomStream& rng) {
  check_inputs(config, state, model);
  RoundStreams streams(rng);

  const std::size_t steps = config.inner_steps;
  const double scale = config.position_scale();
  const double noise_sd = injection_stddev(config);

  RoundRecord rec;
  rec.kind = SamplerKind::sghmc;
  rec.config = config;
  rec.initial = state;
  rec.momenta.push_back(start_momentum(config, state, streams.momentum));
  rec.positions.push_back(state.position);

  for (std::size_t t = 0; t < steps; ++t) {
    rec.positions.push_back(rec.positions.back() + scale * rec.momenta.back());
    const Vector& theta = rec.positions.back();
    if (!theta.allFinite()) {
      mark_failure(rec, t);
      break;
    }
    Vector eta = streams.injection.normal_vector(theta.size(), noise_sd);
    StochasticGradient sg = model.stochastic_gradient(theta, streams.gradient);
    Vector next = sghmc_momentum_step(rec.momenta.back(), sg.gradient, eta, config.step_size,
                                      config.friction);
    rec.noises.push_back(std::move(eta));
    rec.gradients.push_back(std::move(sg.gradient));
    rec.gradient_records.push_back(std::move(sg.record));
    rec.momenta.push_back(std::move(next));
    if (!rec.momenta.back().allFinite()) {
      mark_failure(rec, t);
      break;
    }
  }

  if (rec.outcome == RoundOutcome::numerical_failure) {
    PhaseState keep{state.position, rec.momenta.front()};
    return {std::move(keep), std::move(rec)};
  }
  rec.proposal = {rec.positions.back(), rec.momenta.back()};
  rec.outcome = RoundOutcome::unconditional;
  PhaseState next = rec.proposal;
  return {std::move(next), std::move(rec)};
}

// ---------------------------------------------------------------------------
// HMC (drift-kick-drift leapfrog with exact gradients)

RoundResult hmc_round(const SamplerConfig& config, const PhaseState& state,
                      const EnergyModel& model, RandomStream& rng) {
  check_inputs(config, state, model);
  RoundStreams streams(rng);

  const std::size_t steps = config.inner_steps;
  const double scale = config.position_scale();
  const double eps = config.step_size;

  RoundRecord rec;
  rec.kind = SamplerKind::hmc;
  rec.config = config;
  rec.initial = state;
  const Vector r0 =
      streams.momentum.normal_vector(state.position.size(), std::sqrt(config.momentum_variance));
  rec.uniform = streams.acceptance.uniform();

  Vector theta = state.position + 0.5 * scale * r0;
  Vector r = r0;
  rec.momenta.push_back(r0);
  rec.positions.push_back(theta);
  for (std::size_t t = 0; t < steps; ++t) {
    if (t != 0) {
      theta = theta + scale * r;
      rec.positions.push_back(theta);
    }
    if (!theta.allFinite()) {
      mark_failure(rec, t);
      break;
    }
    Vector g = model.gradient(theta);
    r = r - eps * g;
    rec.gradients.push_back(std::move(g));
    rec.gradient_records.emplace_back(std::monostate{});
    rec.momenta.push_back(r);
    if (!r.allFinite()) {
      mark_failure(rec, t);
      break;
    }
  }

  if (rec.outcome != RoundOutcome::numerical_failure) {
    theta = theta + 0.5 * scale * r;
    rec.positions.push_back(theta);
    rec.proposal = {theta, r};
    if (!theta.allFinite()) mark_failure(rec, steps);
  }
  if (rec.outcome != RoundOutcome::numerical_failure) {
    rec.energy_initial = model.potential(state.position);
    if (config.domain && !config.domain->contains(theta)) {
      rec.outcome = RoundOutcome::out_of_domain;
    } else {
      rec.energy_proposal = model.potential(theta);
      const double log_a = (rec.energy_initial + 0.5 * r0.squaredNorm() / config.momentum_variance) -
                           (rec.energy_proposal + 0.5 * r.squaredNorm() / config.momentum_variance);
      if (std::isfinite(log_a)) {
        rec.log_accept = log_a;
      } else {
        mark_failure(rec, steps);
      }
    }
  }
  const double u = *rec.uniform;
  return resolve_round(std::move(rec), u);
}

// ---------------------------------------------------------------------------
// Reverse replay

RoundRecord replay_reverse(const RoundRecord& record, const EnergyModel& model) {
  if (record.kind == SamplerKind::sghmc || record.kind == SamplerKind::hmc) {
    throw ContractViolation("reverse replay is defined for AMAGOLD rounds only");
  }
  if (!record.complete()) throw ContractViolation("round record is incomplete");

  const SamplerConfig& config = record.config;
  const std::size_t steps = config.inner_steps;
  const double scale = config.position_scale();
  const double damping = config.step_size * config.friction;

  RoundRecord rev;
  rev.kind = record.kind;
  rev.config = config;
  rev.initial = momentum_flip(record.proposal);
  rev.momenta.push_back(rev.initial.momentum);
  rev.rho.push_back(0.0);
  rev.positions.push_back(rev.initial.position + 0.5 * scale * rev.momenta.back());

  for (std::size_t t = 0; t < steps; ++t) {
    if (t != 0) rev.positions.push_back(rev.positions.back() + scale * rev.momenta.back());
    const std::size_t s = steps - 1 - t;
    const Vector& theta = rev.positions.back();
    const GradientNoiseRecord& zeta = record.gradient_records[s];
    Vector g = model.replay_stochastic_gradient(theta, zeta);
    // Noise under which the forward update sends -r_{s+1/2} to -r_{s-1/2}.
    Vector eta = record.noises[s] - 2.0 * damping * (record.momenta[s] + record.momenta[s + 1]);
    Vector next = amagold_momentum_step(rev.momenta.back(), g, eta, config.step_size, config.friction);
    rev.rho.push_back(rev.rho.back() + energy_increment(g, rev.momenta.back(), next, scale));
    rev.noises.push_back(std::move(eta));
    rev.gradients.push_back(std::move(g));
    rev.gradient_records.push_back(zeta);
    rev.momenta.push_back(std::move(next));
  }
  rev.positions.push_back(rev.positions.back() + 0.5 * scale * rev.momenta.back());
  rev.proposal = {rev.positions.back(), rev.momenta.back()};
  rev.energy_initial = model.potential(rev.initial.position);
  rev.energy_proposal = model.potential(rev.proposal.position);
  rev.log_accept = rev.energy_initial - rev.energy_proposal + rev.rho.back();
  rev.outcome = RoundOutcome::pending;
  return rev;
}

// ---------------------------------------------------------------------------
// Chains

double RoundStats::acceptance_rate() const noexcept {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(n);
}

void RoundStats::add(const RoundRecord& record) {
  switch (record.outcome) {
    case RoundOutcome::accepted:
    case RoundOutcome::unconditional:
      ++accepted;
      break;
    case RoundOutcome::rejected:
      ++rejected;
      break;
    case RoundOutcome::out_of_domain:
      ++out_of_domain;
      break;
    case RoundOutcome::numerical_failure:
      ++rejected;
      ++numerical_failures;
      break;
    case RoundOutcome::pending:
      throw ContractViolation("cannot tally an undecided round");
  }
  if (record.outcome == RoundOutcome::unconditional) {
    acceptance_probability_sum += 1.0;
  } else if (record.log_accept && record.outcome != RoundOutcome::numerical_failure) {
    acceptance_probability_sum += acceptance_probability(*record.log_accept);
  }
}

SamplerConfig effective_config(SamplerKind kind, SamplerConfig config) {
  switch (kind) {
    case SamplerKind::amagold:
    case SamplerKind::hmc:
      config.resample_momentum = true;
      break;
    case SamplerKind::amagold_skew:
      config.resample_momentum = false;
      break;
    case SamplerKind::sghmc:
    case SamplerKind::l2mc:
      break;
  }
  return config;
}

RoundResult run_round(SamplerKind kind, const SamplerConfig& config, const PhaseState& state,
                      const EnergyModel& model, RandomStream& rng) {
  switch (kind) {
    case SamplerKind::amagold:
    case SamplerKind::amagold_skew:
      return amagold_round(config, state, model, rng);
    case SamplerKind::l2mc: {
      const ExactGradientView exact(ModelPtr(&model, [](const EnergyModel*) {}));
      RoundResult result = amagold_round(config, state, exact, rng);
      result.record.kind = SamplerKind::l2mc;
      return result;
    }
    case SamplerKind::sghmc:
      return sghmc_round(config, state, model, rng);
    case SamplerKind::hmc:
      return hmc_round(config, state, model, rng);
  }
  throw ContractViolation("unknown sampler kind");
}

PhaseState initial_state(const Vector& position, const SamplerConfig& config, std::uint64_t seed) {
  RandomStream stream = RandomStream::derive(seed, std::numeric_limits<std::uint64_t>::max());
  return {position, stream.normal_vector(position.size(), std::sqrt(config.momentum_variance))};
}

SampleSet run_chain(SamplerKind kind, const SamplerConfig& config, const EnergyModel& model,
                    std::size_t rounds, std::size_t burn_in, std::uint64_t seed,
                    std::optional<Vector> start) {
  if (rounds == 0) throw ContractViolation("rounds must be positive");
  if (burn_in >= rounds) throw ContractViolation("burn-in must be smaller than rounds");
  const SamplerConfig cfg = effective_config(kind, config);
  cfg.validate();

  const auto dim = static_cast<Eigen::Index>(model.dimension());
  Vector origin = start ? *start : Vector::Zero(dim);
  if (origin.size() != dim) throw ContractViolation("start position has the wrong dimension");

  // l2mc: full-batch gradients for the whole chain.
  ExactGradientView exact(ModelPtr(&model, [](const EnergyModel*) {}));
  const EnergyModel& target = kind == SamplerKind::l2mc ? static_cast<const EnergyModel&>(exact) : model;
  const SamplerKind round_kind = kind == SamplerKind::l2mc ? SamplerKind::amagold : kind;

  SampleSet out;
  out.kind = kind;
  out.config = cfg;
  out.seed = seed;
  out.samples.resize(static_cast<Eigen::Index>(rounds - burn_in), dim);
  out.rounds.reserve(rounds - burn_in);

  PhaseState state = initial_state(origin, cfg, seed);
  for (std::size_t i = 0; i < rounds; ++i) {
    RandomStream rng = RandomStream::derive(seed, i);
    RoundResult result = run_round(round_kind, cfg, state, target, rng);
    out.stats.add(result.record);
    state = std::move(result.state);
    if (i >= burn_in) {
      out.samples.row(static_cast<Eigen::Index>(i - burn_in)) = state.position.transpose();
      out.rounds.push_back(i);
    }
  }
  out.final_state = std::move(state);
  return out;
}

// ---------------------------------------------------------------------------
// (h, b) form

ReformulatedParams reparameterize(double step_size, double momentum_variance, double friction) {
  if (!(step_size > 0.0) || !(momentum_variance > 0.0) || !(friction >= 0.0)) {
    throw ConfigurationError("reparameterize: need ε > 0, σ² > 0 and β >= 0");
  }
  return {step_size * step_size / momentum_variance, step_size * friction};
}

StandardParams restore_parameters(const ReformulatedParams& params, double momentum_variance) {
  if (!(params.h > 0.0) || !(params.b >= 0.0) || !(momentum_variance > 0.0)) {
    throw ConfigurationError("restore_parameters: need h > 0, b >= 0 and σ² > 0");
  }
  const double step_size = std::sqrt(params.h * momentum_variance);
  return {step_size, params.b / step_size};
}

ReformulatedRound reformulated_amagold_round(const ReformulatedParams& params,
                                             std::size_t inner_steps, bool resample,
                                             const ReformulatedState& state,
                                             const EnergyModel& model, RandomStream& rng) {
  if (!(params.h > 0.0) || !(params.b >= 0.0) || !(params.b < 1.0) || inner_steps < 1) {
    throw ConfigurationError("reformulated round: need h > 0, 0 <= b < 1 and T >= 1");
  }
  RoundStreams streams(rng);
  const double h = params.h;
  const double b = params.b;
  const double noise_sd = std::sqrt(4.0 * h * b);

  ReformulatedRound out;
  const Vector v0 = resample ? streams.momentum.normal_vector(state.position.size(), std::sqrt(h))
                             : state.velocity;
  const double u = streams.acceptance.uniform();
  out.velocities.push_back(v0);
  out.rho.push_back(0.0);
  out.positions.push_back(state.position + 0.5 * v0);
  for (std::size_t t = 0; t < inner_steps; ++t) {
    if (t != 0) out.positions.push_back(out.positions.back() + out.velocities.back());
    const Vector& theta = out.positions.back();
    const Vector eta = streams.injection.normal_vector(theta.size(), noise_sd);
    const Vector g = model.stochastic_gradient(theta, streams.gradient).gradient;
    const Vector& v = out.velocities.back();
    Vector next = ((1.0 - b) * v - h * g + eta) / (1.0 + b);
    out.rho.push_back(out.rho.back() + 0.5 * g.dot(v + next));
    out.velocities.push_back(std::move(next));
  }
  out.positions.push_back(out.positions.back() + 0.5 * out.velocities.back());

  const Vector& proposal = out.positions.back();
  out.log_accept = model.potential(state.position) - model.potential(proposal) + out.rho.back();
  if (metropolis_accept(out.log_accept, u)) {
    out.outcome = RoundOutcome::accepted;
    out.state = {proposal, out.velocities.back()};
  } else {
    out.outcome = RoundOutcome::rejected;
    out.state = {state.position, -v0};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel view

StochasticLeapfrogKernel::StochasticLeapfrogKernel(const SamplerConfig& config,
                                                   const EnergyModel& model)
    : config_(config), model_(&model) {
  config_.validate();
}

auto StochasticLeapfrogKernel::draw_noise(const State& x, RandomStream& rng) const -> Noise {
  const Vector mid = x.position + 0.5 * config_.position_scale() * x.momentum;
  return model_->stochastic_gradient(mid, rng).record;
}

auto StochasticLeapfrogKernel::sample(const State& x, const Noise& zeta, RandomStream& rng) const
    -> State {
  const double scale = config_.position_scale();
  const Vector mid = x.position + 0.5 * scale * x.momentum;
  const Vector g = model_->replay_stochastic_gradient(mid, zeta);
  const Vector eta = rng.normal_vector(mid.size(), injection_stddev(config_));
  Vector r = amagold_momentum_step(x.momentum, g, eta, config_.step_size, config_.friction);
  Vector theta = mid + 0.5 * scale * r;
  return {std::move(theta), std::move(r)};
}

double StochasticLeapfrogKernel::log_density(const State& x, const State& y,
                                             const Noise& zeta) const {
  constexpr double kMinusInf = -std::numeric_limits<double>::infinity();
  const double scale = config_.position_scale();
  const Vector mid = x.position + 0.5 * scale * x.momentum;
  const Vector landing = mid + 0.5 * scale * y.momentum;
  const double tolerance = 1e-9 * (1.0 + y.position.lpNorm<Eigen::Infinity>());
  if ((landing - y.position).lpNorm<Eigen::Infinity>() > tolerance) return kMinusInf;

  const double damping = config_.step_size * config_.friction;
  const Vector g = model_->replay_stochastic_gradient(mid, zeta);
  const Vector eta = (1.0 + damping) * y.momentum - (1.0 - damping) * x.momentum + config_.step_size * g;
  const double var = 4.0 * damping * config_.momentum_variance;
  if (var == 0.0) {
    const double slack = 1e-9 * (1.0 + y.momentum.lpNorm<Eigen::Infinity>());
    return eta.lpNorm<Eigen::Infinity>() <= slack ? 0.0 : kMinusInf;
  }
  return -0.5 * eta.squaredNorm() / var -
         0.5 * static_cast<double>(eta.size()) * std::log(2.0 * std::numbers::pi * var);
}

double StochasticLeapfrogKernel::log_target(const State& x) const {
  return -hamiltonian(*model_, x, config_.momentum_variance);
}

}  // namespace amagold
