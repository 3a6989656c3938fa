#include <memory>

#include <benchmark/benchmark.h>

#include "amagold/dataio.hpp"
#include "amagold/samplers.hpp"

using namespace amagold;

namespace {

ModelPtr noisy_double_well() {
  return std::make_shared<GaussianNoiseGradient>(std::make_shared<DoubleWell>(), 1.0);
}

ModelPtr heart(std::size_t minibatch) {
  auto d = std::make_shared<const Dataset>(
      load_dataset(std::string(AMAGOLD_DATA_DIR) + "/heart.txt", {true, true}));
  return std::make_shared<LogisticRegression>(d, minibatch);
}

void round_bench(benchmark::State& st, SamplerKind kind, const ModelPtr& model) {
  SamplerConfig c;
  c.step_size = 0.1;
  c.inner_steps = static_cast<std::size_t>(st.range(0));
  const ModelPtr exact = std::make_shared<ExactGradientView>(model);
  const EnergyModel& m = kind == SamplerKind::hmc ? *exact : *model;
  PhaseState state = initial_state(Vector::Zero(static_cast<Eigen::Index>(m.dimension())), c, 1);
  std::uint64_t i = 0;
  for (auto _ : st) {
    RandomStream rng = RandomStream::derive(1, i++);
    state = run_round(kind, c, state, m, rng).state;
    benchmark::DoNotOptimize(state.position.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_AmagoldDoubleWell(benchmark::State& st) { round_bench(st, SamplerKind::amagold, noisy_double_well()); }
void BM_SghmcDoubleWell(benchmark::State& st) { round_bench(st, SamplerKind::sghmc, noisy_double_well()); }
void BM_HmcDoubleWell(benchmark::State& st) { round_bench(st, SamplerKind::hmc, noisy_double_well()); }
void BM_AmagoldHeart(benchmark::State& st) { round_bench(st, SamplerKind::amagold, heart(16)); }
void BM_SghmcHeart(benchmark::State& st) { round_bench(st, SamplerKind::sghmc, heart(16)); }

void BM_HeartGradient(benchmark::State& st) {
  const ModelPtr model = heart(static_cast<std::size_t>(st.range(0)));
  const Vector theta = Vector::Constant(static_cast<Eigen::Index>(model->dimension()), 0.1);
  RandomStream rng(3);
  for (auto _ : st) {
    Vector g = model->stochastic_gradient(theta, rng).gradient;
    benchmark::DoNotOptimize(g.data());
  }
}

}  // namespace

BENCHMARK(BM_AmagoldDoubleWell)->Arg(1)->Arg(10)->Arg(50);
BENCHMARK(BM_SghmcDoubleWell)->Arg(1)->Arg(10)->Arg(50);
BENCHMARK(BM_HmcDoubleWell)->Arg(1)->Arg(10)->Arg(50);
BENCHMARK(BM_AmagoldHeart)->Arg(10);
BENCHMARK(BM_SghmcHeart)->Arg(10);
BENCHMARK(BM_HeartGradient)->Arg(16)->Arg(270);
BENCHMARK_MAIN();
