#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "amagold/ama_core.hpp"
#include "amagold/diagnostics.hpp"
#include "oracles.hpp"

using namespace amagold;

namespace {

double std_normal_log(const Eigen::VectorXd& x) { return -0.5 * x.squaredNorm(); }

// Deterministic +1 shift: the reverse move is impossible.
struct ShiftKernel {
  using State = Eigen::VectorXd;
  struct Noise {};
  Noise draw_noise(const State&, RandomStream&) const { return {}; }
  State sample(const State& x, const Noise&, RandomStream&) const { return x.array() + 1.0; }
  double log_density(const State& from, const State& to, const Noise&) const {
    return ((to - from).array() == 1.0).all() ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  static bool is_finite(const State& x) { return x.allFinite(); }
};

// Blows up on its second step.
struct ExplodingKernel {
  using State = Eigen::VectorXd;
  struct Noise {};
  Noise draw_noise(const State&, RandomStream&) const { return {}; }
  State sample(const State& x, const Noise&, RandomStream&) const {
    return x(0) > 0.5 ? State::Constant(1, std::nan("")) : State::Constant(1, 1.0);
  }
  double log_density(const State&, const State&, const Noise&) const { return 0.0; }
  static bool is_finite(const State& x) { return x.allFinite(); }
};

static_assert(ProposalKernel<GaussianRandomWalkKernel>);
static_assert(ProposalKernel<ShiftKernel>);

}  // namespace

TEST(AmortizedProposal, PathShape) {
  GaussianRandomWalkKernel k(0.5);
  RandomStream rng(1);
  const auto path = run_amortized_proposal(k, Eigen::VectorXd::Zero(2), 7, rng);
  EXPECT_TRUE(path.well_formed());
  EXPECT_EQ(path.steps(), 7u);
  EXPECT_EQ(path.states.size(), 8u);
  const auto back = path.reversed().reversed();
  for (std::size_t i = 0; i < path.states.size(); ++i) EXPECT_EQ(back.states[i], path.states[i]);
  EXPECT_EQ(path.reversed().initial(), path.proposal());
}

TEST(AmortizedProposal, ZeroStepsAndNonFiniteStates) {
  GaussianRandomWalkKernel k(0.5);
  RandomStream rng(2);
  EXPECT_THROW(run_amortized_proposal(k, Eigen::VectorXd::Zero(1), 0, rng), ContractViolation);
  try {
    run_amortized_proposal(ExplodingKernel{}, Eigen::VectorXd::Zero(1), 5, rng);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.step(), 1);
  }
  EXPECT_THROW(GaussianRandomWalkKernel(0.0), ConfigurationError);
}

TEST(AmortizedAcceptance, SymmetricKernelReducesToTargetRatio) {
  GaussianRandomWalkKernel k(0.8);
  RandomStream rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto path = run_amortized_proposal(k, rng.normal_vector(3), 6, rng);
    const double expected = std_normal_log(path.proposal()) - std_normal_log(path.initial());
    EXPECT_NEAR(log_accept_reversible(path, k, std_normal_log), expected, 1e-12);
    EXPECT_NEAR(log_accept_reversible_stepwise(path, k, std_normal_log), expected, 1e-12);
    EXPECT_NEAR(log_accept_skew(path, k, std_normal_log, IdentityInvolution{}), expected, 1e-12);
  }
}

TEST(AmortizedAcceptance, StepwiseMatchesProductForm) {
  GaussianRandomWalkKernel draw(0.6);
  RandomStream rng(4);
  const auto path = run_amortized_proposal(draw, rng.normal_vector(2), 5, rng);
  auto log_target = [](const Eigen::VectorXd& x) { return -0.25 * x.squaredNorm() + x.sum(); };
  EXPECT_NEAR(log_accept_reversible(path, draw, log_target),
              log_accept_reversible_stepwise(path, draw, log_target), 1e-12);
}

TEST(AmortizedAcceptance, ImpossibleReverseMoveRejects) {
  ShiftKernel k;
  RandomStream rng(5);
  const auto path = run_amortized_proposal(k, Eigen::VectorXd::Zero(1), 3, rng);
  const double a = log_accept_reversible(path, k, std_normal_log);
  EXPECT_EQ(a, -std::numeric_limits<double>::infinity());
  EXPECT_FALSE(metropolis_accept(a, 0.0));
  EXPECT_EQ(acceptance_probability(a), 0.0);

  auto bad = path;
  bad.states.pop_back();
  EXPECT_THROW(log_accept_reversible(bad, k, std_normal_log), ContractViolation);
}

TEST(MetropolisAccept, Rule) {
  EXPECT_TRUE(metropolis_accept(0.0, 0.999999));
  EXPECT_TRUE(metropolis_accept(5.0, 0.5));
  EXPECT_FALSE(metropolis_accept(std::log(0.3), 0.3));
  EXPECT_TRUE(metropolis_accept(std::log(0.3), 0.29));
  EXPECT_FALSE(metropolis_accept(std::nan(""), 0.0));
  EXPECT_DOUBLE_EQ(acceptance_probability(std::log(0.25)), 0.25);
  EXPECT_EQ(acceptance_probability(3.0), 1.0);
}

TEST(AmortizedChain, PreservesStandardNormal) {
  GaussianRandomWalkKernel k(1.0);
  const int walkers = 4000;
  std::vector<double> end(walkers), fresh(walkers);
  RandomStream init(6);
  for (int w = 0; w < walkers; ++w) {
    Eigen::VectorXd x = init.normal_vector(1);
    RandomStream rng = RandomStream::derive(6, static_cast<std::uint64_t>(w));
    for (int round = 0; round < 5; ++round) {
      const auto path = run_amortized_proposal(k, x, 4, rng);
      if (metropolis_accept(log_accept_reversible(path, k, std_normal_log), rng.uniform())) {
        x = path.proposal();
      }
    }
    end[w] = x[0];
    fresh[w] = init.normal();
  }
  const double d = ks_statistic(end, fresh);
  EXPECT_NEAR(d, oracle::brute_force_ks(end, fresh), 1e-12);
  EXPECT_LT(d, ks_critical_value(walkers, walkers, 0.001));
}

TEST(AmortizedAcceptance, ReversedPathNegates) {
  GaussianRandomWalkKernel k(0.7);
  RandomStream rng(7);
  auto log_target = [](const Eigen::VectorXd& x) { return -0.25 * x.squaredNorm() + x.sum(); };
  for (int rep = 0; rep < 10; ++rep) {
    const auto path = run_amortized_proposal(k, rng.normal_vector(2), 4, rng);
    EXPECT_NEAR(log_accept_reversible(path.reversed(), k, log_target),
                -log_accept_reversible(path, k, log_target), 1e-10);
  }
}
