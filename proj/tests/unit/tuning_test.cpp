#include <filesystem>
#include <fstream>
#include <memory>

#include <gtest/gtest.h>

#include "amagold/tuning.hpp"

using namespace amagold;

TEST(TunerSchedule, Validation) {
  EXPECT_NO_THROW(TunerSchedule{}.validate());
  TunerSchedule s;
  s.target_acceptance = 1.0;
  EXPECT_THROW(s.validate(), ConfigurationError);
  s = TunerSchedule{};
  s.window = 0;
  EXPECT_THROW(s.validate(), ConfigurationError);
  s = TunerSchedule{};
  s.min_step_size = 2.0;
  EXPECT_THROW(s.validate(), ConfigurationError);
  s = TunerSchedule{};
  s.gain = 0.0;
  EXPECT_THROW(s.validate(), ConfigurationError);
  EXPECT_EQ(TunerSchedule{}.windows(), 50u);
}

TEST(AdaptStepSize, FixedPointMonotoneAndClamped) {
  TunerSchedule s;
  EXPECT_EQ(adapt_step_size(0.1, s.target_acceptance, s), 0.1);
  EXPECT_GT(adapt_step_size(0.1, 1.0, s), 0.1);
  EXPECT_LT(adapt_step_size(0.1, 0.2, s), 0.1);
  EXPECT_NEAR(adapt_step_size(0.1, 1.0, s), 0.1 * std::exp(0.5 * 0.15), 1e-15);
  EXPECT_EQ(adapt_step_size(0.99, 1.0, s), 1.0);
  EXPECT_EQ(adapt_step_size(1e-6, 0.0, s), 1e-6);
}

TEST(Tuner, TraceRespectsBoundsAndMonotonicity) {
  auto model = std::make_shared<GaussianNoiseGradient>(std::make_shared<DoubleWell>(), 1.0);
  SamplerConfig c;
  c.step_size = 0.01;
  TunerSchedule s;
  s.total_rounds = 4000;
  const TuningResult r = tune_step_size(SamplerKind::amagold, c, *model, s,
                                        initial_state(Vector::Zero(1), c, 3), 3);
  ASSERT_EQ(r.trace.size(), 20u);
  EXPECT_EQ(r.trace.back().end_round, 4000u);
  EXPECT_EQ(r.stats.total(), 4000u);
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const auto& w = r.trace[i];
    EXPECT_GE(w.step_size, s.min_step_size);
    EXPECT_LE(w.step_size, s.max_step_size);
    const double next = i + 1 < r.trace.size() ? r.trace[i + 1].step_size : r.step_size;
    if (w.acceptance > s.target_acceptance) {
      EXPECT_GE(next, w.step_size);
    } else {
      EXPECT_LE(next, w.step_size);
    }
  }
  EXPECT_GT(r.step_size, 0.01);
}

TEST(Tuner, DeterministicForSeed) {
  DoubleWell model;
  SamplerConfig c;
  c.step_size = 0.05;
  TunerSchedule s;
  s.total_rounds = 1000;
  const PhaseState start = initial_state(Vector::Zero(1), c, 1);
  const TuningResult a = tune_step_size(SamplerKind::amagold, c, model, s, start, 1);
  const TuningResult b = tune_step_size(SamplerKind::amagold, c, model, s, start, 1);
  EXPECT_EQ(a.step_size, b.step_size);
  EXPECT_EQ(a.final_state, b.final_state);
}

TEST(Tuner, StallAtLowerBoundFails) {
  IsotropicGaussian model(1, 1e-12);
  SamplerConfig c;
  c.step_size = 0.5;
  c.friction = 0.0;
  TunerSchedule s;
  s.min_step_size = 0.5;
  s.max_step_size = 1.0;
  s.window = 20;
  s.total_rounds = 400;
  try {
    tune_step_size(SamplerKind::amagold, c, model, s, initial_state(Vector::Constant(1, 0.3), c, 2), 2);
    FAIL() << "expected TuningFailure";
  } catch (const TuningFailure& e) {
    EXPECT_EQ(e.trace().size(), kTuningStallWindows);
    for (const auto& w : e.trace()) EXPECT_EQ(w.acceptance, 0.0);
  }
}

TEST(Tuner, TraceCsv) {
  const auto path = (std::filesystem::temp_directory_path() / "amagold_trace.csv").string();
  write_tuning_trace({{0, 0.01, 1.0, 200}, {1, 0.5, 0.25, 400}}, path);
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(all, "window,epsilon,acceptance\n0,0.01,1\n1,0.5,0.25\n");
}
