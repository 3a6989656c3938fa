#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "amagold/ama_core.hpp"
#include "amagold/errors.hpp"
#include "amagold/samplers.hpp"
#include "oracles.hpp"

using namespace amagold;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

SamplerConfig make_config(double eps, double beta, std::size_t steps) {
  SamplerConfig c;
  c.step_size = eps;
  c.friction = beta;
  c.inner_steps = steps;
  return c;
}

std::shared_ptr<const EnergyModel> noisy_double_well() {
  return std::make_shared<GaussianNoiseGradient>(std::make_shared<DoubleWell>(), 1.0);
}

}  // namespace

TEST(SamplerConfig, Validation) {
  EXPECT_NO_THROW(SamplerConfig{}.validate());
  EXPECT_THROW(make_config(0.0, 0.1, 3).validate(), ConfigurationError);
  EXPECT_THROW(make_config(0.1, -1.0, 3).validate(), ConfigurationError);
  EXPECT_THROW(make_config(2.0, 0.5, 3).validate(), ConfigurationError);
  EXPECT_THROW(make_config(0.1, 0.1, 0).validate(), ConfigurationError);
  SamplerConfig c;
  c.momentum_variance = 0.0;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = SamplerConfig{};
  c.domain = Box{vec({1.0}), vec({0.0})};
  EXPECT_THROW(c.validate(), ConfigurationError);
}

TEST(SamplerKind, NamesRoundTrip) {
  for (auto k : {SamplerKind::amagold, SamplerKind::amagold_skew, SamplerKind::sghmc,
                 SamplerKind::hmc, SamplerKind::l2mc}) {
    EXPECT_EQ(parse_sampler_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_sampler_kind("nuts"));
}

TEST(StepPrimitives, DampingWithoutForces) {
  const Vector r = vec({2.0, -1.0});
  const Vector z = Vector::Zero(2);
  const Vector next = amagold_momentum_step(r, z, z, 0.2, 0.5);
  EXPECT_NEAR(next[0], 2.0 * 0.9 / 1.1, 1e-15);
  EXPECT_NEAR(next[1], -0.9 / 1.1, 1e-15);
  EXPECT_LT(next.norm(), r.norm());
  EXPECT_EQ(amagold_momentum_step(r, z, z, 0.2, 0.0), r);
  EXPECT_NEAR(energy_increment(vec({1.0, 2.0}), vec({1.0, 0.0}), vec({0.0, 1.0}), 0.5), 0.75, 1e-15);
  const Vector s = sghmc_momentum_step(vec({1.0}), vec({2.0}), vec({0.5}), 0.1, 0.25);
  EXPECT_NEAR(s[0], 1.0 - 0.2 - 0.05 + 0.5, 1e-15);
}

TEST(AmagoldRound, MatchesScalarRecomputation) {
  const auto model = noisy_double_well();
  const SamplerConfig c = make_config(0.15, 0.25, 10);
  RandomStream rng(21);
  PhaseState state{vec({0.4}), vec({0.0})};
  for (int rep = 0; rep < 50; ++rep) {
    const RoundRecord rec = amagold_propose(c, state, *model, rng);
    ASSERT_TRUE(rec.complete());
    const double h = c.step_size / c.momentum_variance;
    const double b = c.step_size * c.friction;
    double theta = state.position[0] + 0.5 * h * rec.momenta[0][0];
    double r = rec.momenta[0][0];
    double rho = 0.0;
    for (std::size_t t = 0; t < c.inner_steps; ++t) {
      if (t > 0) theta += h * r;
      EXPECT_NEAR(rec.positions[t][0], theta, 1e-12);
      const double g = oracle::double_well_du(theta) +
                       std::get<GaussianPerturbation>(rec.gradient_records[t]).noise[0];
      const double next = ((1.0 - b) * r - c.step_size * g + rec.noises[t][0]) / (1.0 + b);
      rho += 0.5 * h * g * (r + next);
      r = next;
      EXPECT_NEAR(rec.momenta[t + 1][0], r, 1e-12);
      EXPECT_NEAR(rec.rho[t + 1], rho, 1e-12);
    }
    theta += 0.5 * h * r;
    EXPECT_NEAR(rec.proposal.position[0], theta, 1e-12);
    const double log_a = oracle::double_well_u(state.position[0]) - oracle::double_well_u(theta) + rho;
    EXPECT_NEAR(*rec.log_accept, log_a, 1e-11);
    state = resolve_round(rec, *rec.uniform).state;
  }
}

TEST(AmagoldRound, RejectionNegatesStartMomentum) {
  DoubleWell model;
  const SamplerConfig c = make_config(0.1, 0.25, 5);
  RandomStream rng(22);
  RoundRecord rec = amagold_propose(c, {vec({0.2}), vec({0.0})}, model, rng);
  const RoundResult rejected = resolve_round(rec, 1.0 - 1e-16);
  if (*rec.log_accept < 0.0) {
    EXPECT_EQ(rejected.record.outcome, RoundOutcome::rejected);
    EXPECT_EQ(rejected.state.position, rec.initial.position);
    EXPECT_EQ(rejected.state.momentum, -rec.start_momentum());
  }
  const RoundResult accepted = resolve_round(rec, 0.0);
  EXPECT_EQ(accepted.record.outcome, RoundOutcome::accepted);
  EXPECT_EQ(accepted.state, rec.proposal);
}

TEST(AmagoldRound, SkewVariantKeepsIncomingMomentum) {
  DoubleWell model;
  SamplerConfig c = effective_config(SamplerKind::amagold_skew, make_config(0.1, 0.25, 4));
  EXPECT_FALSE(c.resample_momentum);
  RandomStream rng(23);
  const PhaseState s{vec({0.5}), vec({-0.7})};
  const RoundRecord rec = amagold_propose(c, s, model, rng);
  EXPECT_EQ(rec.kind, SamplerKind::amagold_skew);
  EXPECT_EQ(rec.start_momentum(), s.momentum);
  EXPECT_THROW(amagold_propose(c, {vec({0.5}), Vector()}, model, rng), ContractViolation);
}

TEST(HmcReduction, FullBatchZeroFrictionMatchesHmc) {
  BananaDist1 model;
  const SamplerConfig c = make_config(0.2, 0.0, 8);
  PhaseState a{vec({0.5, -1.0}), vec({0.0, 0.0})};
  PhaseState b = a;
  for (std::uint64_t i = 0; i < 200; ++i) {
    RandomStream ra = RandomStream::derive(31, i);
    RandomStream rb = RandomStream::derive(31, i);
    const RoundResult x = amagold_round(c, a, model, ra);
    const RoundResult y = hmc_round(c, b, model, rb);
    ASSERT_EQ(x.record.proposal, y.record.proposal);
    ASSERT_EQ(x.record.outcome, y.record.outcome);
    const double dh = hamiltonian(model, {a.position, x.record.start_momentum()}, 1.0) -
                      hamiltonian(model, x.record.proposal, 1.0);
    EXPECT_NEAR(*x.record.log_accept, dh, 1e-10);
    EXPECT_NEAR(*y.record.log_accept, dh, 1e-10);
    const double rho = 0.5 * (x.record.momenta.front().squaredNorm() - x.record.momenta.back().squaredNorm());
    EXPECT_NEAR(x.record.final_rho(), rho, 1e-10);
    a = x.state;
    b = y.state;
  }
}

TEST(ReverseReplay, MirrorsForwardTrajectory) {
  auto model = std::make_shared<GaussianNoiseGradient>(std::make_shared<BananaDist1>(), 1.0);
  for (double beta : {0.0, 0.25, 1.5}) {
    const SamplerConfig c = make_config(0.1, beta, 6);
    RandomStream rng(41);
    const RoundRecord fwd = amagold_propose(c, {vec({1.0, 0.5}), vec({0.0, 0.0})}, *model, rng);
    const RoundRecord rev = replay_reverse(fwd, *model);
    const std::size_t T = c.inner_steps;
    for (std::size_t k = 0; k < T; ++k) {
      EXPECT_LT((rev.positions[k] - fwd.positions[T - 1 - k]).norm(), 1e-12);
    }
    EXPECT_LT((rev.positions[T] - fwd.initial.position).norm(), 1e-12);
    for (std::size_t k = 0; k <= T; ++k) {
      EXPECT_LT((rev.momenta[k] + fwd.momenta[T - k]).norm(), 1e-12);
      EXPECT_NEAR(rev.rho[k], fwd.rho[T - k] - fwd.rho[T], 1e-12);
    }
    EXPECT_NEAR(*rev.log_accept, -*fwd.log_accept, 1e-12);
  }
}

TEST(ReverseReplay, NoiseDensityRatioReproducesAccumulator) {
  // Gaussian path-density ratio of the reverse and forward injected noise.
  auto model = noisy_double_well();
  const SamplerConfig c = make_config(0.1, 0.3, 7);
  RandomStream rng(42);
  const RoundRecord fwd = amagold_propose(c, {vec({-1.5}), vec({0.0})}, *model, rng);
  const RoundRecord rev = replay_reverse(fwd, *model);
  const double var = 4.0 * c.step_size * c.friction * c.momentum_variance;
  double log_ratio = 0.0;
  for (std::size_t t = 0; t < c.inner_steps; ++t) {
    log_ratio += -0.5 * rev.noises[t].squaredNorm() / var + 0.5 * fwd.noises[t].squaredNorm() / var;
  }
  const double kinetic = 0.5 * (fwd.momenta.back().squaredNorm() - fwd.momenta.front().squaredNorm());
  EXPECT_NEAR(log_ratio, fwd.final_rho() + kinetic / c.momentum_variance, 1e-10);
}

TEST(ReverseReplay, RejectsBaselines) {
  DoubleWell model;
  RandomStream rng(43);
  const RoundResult r = sghmc_round(make_config(0.1, 0.2, 3), {vec({0.0}), vec({0.1})}, model, rng);
  EXPECT_THROW(replay_reverse(r.record, model), ContractViolation);
}

TEST(SkewKernel, AmortizedSkewRatioEqualsEnergyForm) {
  auto model = std::make_shared<GaussianNoiseGradient>(std::make_shared<CrossMixtureDist2>(), 0.5);
  for (double beta : {0.0, 0.25}) {
    const SamplerConfig c = make_config(0.12, beta, 5);
    RandomStream rng(51);
    const RoundRecord rec = amagold_propose(c, {vec({0.3, -0.8}), vec({0.0, 0.0})}, *model, rng);
    StochasticLeapfrogKernel kernel(c, *model);
    PathOf<StochasticLeapfrogKernel> path;
    const double h = c.position_scale();
    path.states.push_back({rec.initial.position, rec.momenta[0]});
    for (std::size_t t = 0; t < c.inner_steps; ++t) {
      path.samples.push_back(rec.gradient_records[t]);
      path.states.push_back({rec.positions[t] + 0.5 * h * rec.momenta[t + 1], rec.momenta[t + 1]});
    }
    path.states.back() = rec.proposal;
    const double skew = log_accept_skew(path, kernel, [&](const PhaseState& s) { return kernel.log_target(s); },
                                        MomentumFlip{});
    EXPECT_NEAR(skew, *rec.log_accept, 1e-9) << "beta " << beta;
  }
}

TEST(SkewKernel, SampledPathIsScoredConsistently) {
  DoubleWell model;
  const SamplerConfig c = make_config(0.1, 0.25, 4);
  StochasticLeapfrogKernel kernel(c, model);
  RandomStream rng(52);
  const auto path = run_amortized_proposal(kernel, PhaseState{vec({0.3}), vec({1.0})}, 4, rng);
  for (std::size_t t = 0; t < path.steps(); ++t) {
    EXPECT_TRUE(std::isfinite(kernel.log_density(path.states[t], path.states[t + 1], path.samples[t])));
  }
  PhaseState off = path.states[1];
  off.position[0] += 1e-3;
  EXPECT_EQ(kernel.log_density(path.states[0], off, path.samples[0]),
            -std::numeric_limits<double>::infinity());
}

TEST(Reformulation, ParameterMapRoundTrips) {
  const ReformulatedParams p = reparameterize(0.2, 0.5, 0.3);
  EXPECT_NEAR(p.h, 0.08, 1e-15);
  EXPECT_NEAR(p.b, 0.06, 1e-15);
  const StandardParams s = restore_parameters(p, 0.5);
  EXPECT_NEAR(s.step_size, 0.2, 1e-15);
  EXPECT_NEAR(s.friction, 0.3, 1e-15);
  EXPECT_THROW(reparameterize(0.0, 1.0, 0.1), ConfigurationError);
  EXPECT_THROW(restore_parameters({-1.0, 0.1}, 1.0), ConfigurationError);
}

TEST(Reformulation, VelocityFormMatchesStandardRound) {
  auto model = std::make_shared<GaussianNoiseGradient>(std::make_shared<BananaDist1>(), 1.0);
  for (double sigma2 : {1.0, 0.3}) {
    SamplerConfig c = make_config(0.1, 0.4, 9);
    c.momentum_variance = sigma2;
    const ReformulatedParams p = reparameterize(c.step_size, sigma2, c.friction);
    PhaseState s{vec({0.7, 1.2}), vec({0.0, 0.0})};
    ReformulatedState v{s.position, Vector::Zero(2)};
    for (std::uint64_t i = 0; i < 100; ++i) {
      RandomStream ra = RandomStream::derive(61, i);
      RandomStream rb = RandomStream::derive(61, i);
      const RoundResult std_round = amagold_round(c, s, *model, ra);
      const ReformulatedRound alt = reformulated_amagold_round(p, c.inner_steps, true, v, *model, rb);
      for (std::size_t t = 0; t <= c.inner_steps; ++t) {
        ASSERT_LT((alt.positions[t] - std_round.record.positions[t]).norm(), 1e-12);
        ASSERT_LT((alt.velocities[t] - c.position_scale() * std_round.record.momenta[t]).norm(), 1e-12);
      }
      ASSERT_NEAR(alt.log_accept, *std_round.record.log_accept, 1e-11);
      ASSERT_EQ(alt.outcome, std_round.record.outcome);
      s = std_round.state;
      v = alt.state;
    }
  }
}

TEST(Sghmc, RoundFollowsUpdateAndIsUnconditional) {
  DoubleWell model;
  const SamplerConfig c = make_config(0.1, 0.2, 5);
  RandomStream rng(71);
  const RoundResult r = sghmc_round(c, {vec({0.3}), vec({0.0})}, model, rng);
  EXPECT_EQ(r.record.outcome, RoundOutcome::unconditional);
  const double h = c.position_scale();
  double theta = 0.3;
  double mom = r.record.momenta[0][0];
  for (std::size_t t = 0; t < 5; ++t) {
    theta += h * mom;
    mom = mom - c.step_size * oracle::double_well_du(theta) - 2.0 * c.step_size * c.friction * mom +
          r.record.noises[t][0];
  }
  EXPECT_NEAR(r.state.position[0], theta, 1e-12);
  EXPECT_NEAR(r.state.momentum[0], mom, 1e-12);
}

TEST(Domain, OutsideBoxIsRejected) {
  DoubleWell model;
  SamplerConfig c = make_config(0.3, 0.25, 10);
  c.domain = Box{vec({-0.01}), vec({0.01})};
  RandomStream rng(81);
  const RoundResult r = amagold_round(c, {vec({0.0}), vec({0.0})}, model, rng);
  ASSERT_EQ(r.record.outcome, RoundOutcome::out_of_domain);
  EXPECT_EQ(r.state.position, vec({0.0}));
  EXPECT_EQ(r.state.momentum, -r.record.start_momentum());
  RoundStats stats;
  stats.add(r.record);
  EXPECT_EQ(stats.out_of_domain, 1u);
  EXPECT_EQ(stats.acceptance_rate(), 0.0);
}

TEST(NumericalFailure, ChainSurvivesOverflow) {
  DoubleWell model;
  SamplerConfig c = make_config(0.9, 0.0, 200);
  c.momentum_variance = 1e-3;
  const SampleSet s = run_chain(SamplerKind::amagold, c, model, 30, 0, 5, vec({3.5}));
  EXPECT_GT(s.stats.numerical_failures, 0u);
  EXPECT_EQ(s.stats.total(), 30u);
  EXPECT_LE(s.stats.numerical_failures, s.stats.rejected);
  EXPECT_TRUE(s.samples.allFinite());
}

TEST(Chain, DeterministicAndSeedSensitive) {
  auto model = noisy_double_well();
  const SamplerConfig c = make_config(0.15, 0.25, 10);
  const SampleSet a = run_chain(SamplerKind::amagold, c, *model, 500, 100, 9);
  const SampleSet b = run_chain(SamplerKind::amagold, c, *model, 500, 100, 9);
  const SampleSet d = run_chain(SamplerKind::amagold, c, *model, 500, 100, 10);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, d.samples);
  EXPECT_EQ(a.samples.rows(), 400);
  EXPECT_EQ(a.rounds.front(), 100u);
  EXPECT_EQ(a.rounds.back(), 499u);
  EXPECT_EQ(a.stats.total(), 500u);
  EXPECT_THROW(run_chain(SamplerKind::amagold, c, *model, 10, 10, 1), ContractViolation);
}

TEST(Chain, L2mcUsesExactGradients) {
  auto model = noisy_double_well();
  const SamplerConfig c = make_config(0.1, 0.25, 5);
  RandomStream rng(91);
  const RoundResult r = run_round(SamplerKind::l2mc, c, {vec({0.1}), vec({0.2})}, *model, rng);
  EXPECT_EQ(r.record.kind, SamplerKind::l2mc);
  for (const auto& rec : r.record.gradient_records) {
    EXPECT_TRUE(std::holds_alternative<std::monostate>(rec));
  }
}

TEST(RoundStats, CountsOutcomes) {
  RoundStats s;
  RoundRecord r;
  r.outcome = RoundOutcome::accepted;
  r.log_accept = 0.5;
  s.add(r);
  r.outcome = RoundOutcome::rejected;
  r.log_accept = std::log(0.25);
  s.add(r);
  r.outcome = RoundOutcome::numerical_failure;
  s.add(r);
  EXPECT_EQ(s.accepted, 1u);
  EXPECT_EQ(s.rejected, 2u);
  EXPECT_EQ(s.numerical_failures, 1u);
  EXPECT_DOUBLE_EQ(s.acceptance_rate(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.acceptance_probability_sum, 1.25);
  r.outcome = RoundOutcome::pending;
  EXPECT_THROW(s.add(r), ContractViolation);
}
