#include <benchmark/benchmark.h>

#include <numbers>

#include "squintlab/baselines.hpp"
#include "squintlab/layout_optimizer.hpp"

using namespace squintlab;

namespace {

constexpr double kFc = 100e9;
const double kLambda = kSpeedOfLight / kFc;
const UserGeometry kUser{5.0, std::numbers::pi / 3, std::numbers::pi / 6};

}  // namespace

static void BM_BandGains(benchmark::State& state) {
  const int subcarriers = static_cast<int>(state.range(0));
  const ArrayLayout layout = nominal_layout(1, 1, 16, 4, kLambda);
  const Waveband band{kFc, 20e9, subcarriers, subcarriers / 8};
  for (auto _ : state) {
    benchmark::DoNotOptimize(per_subcarrier_gains(layout, band, kUser, 0));
  }
  state.SetComplexityN(subcarriers);
}
BENCHMARK(BM_BandGains)->RangeMultiplier(2)->Range(32, 512)->Complexity();

static void BM_GainDerivatives(benchmark::State& state) {
  const ArrayLayout layout = nominal_layout(1, 1, 16, 4, kLambda);
  const Waveband band{kFc, 20e9, 64, 8};
  for (auto _ : state) {
    benchmark::DoNotOptimize(gain_gradient_hessian(layout, band, 1, kUser, 0, 3));
  }
}
BENCHMARK(BM_GainDerivatives);

static void BM_TileSubproblem(benchmark::State& state) {
  const ArrayLayout layout = nominal_layout(1, 1, 16, 4, kLambda);
  const Waveband band{kFc, 20e9, 64, 8};
  SurrogateModel model;
  model.expansion = layout.tile_translations[0][5];
  for (const int l : {1, 2, 63, 64}) {
    const GainDerivatives d = gain_gradient_hessian(layout, band, l, kUser, 0, 5);
    QuadraticSurrogate q{d.value, d.gradient, concavify(d.hessian)};
    model.subcarriers.push_back(l - 1);
    model.models.push_back(q);
  }
  const Box2 box = feasible_translation_box(layout, 0, 5);
  std::vector<Halfspace> spacing;
  for (int other = 0; other < 16; ++other) {
    if (other == 5) continue;
    spacing.push_back(linearized_spacing(model.expansion, layout.tile_translations[0][other],
                                         layout.d_min));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_tile_subproblem(model, box, spacing, 1e-6));
  }
}
BENCHMARK(BM_TileSubproblem);

static void BM_OptimizeLayout(benchmark::State& state) {
  const int subcarriers = static_cast<int>(state.range(0));
  const ArrayLayout layout = nominal_layout(1, 1, 16, 4, kLambda);
  const Waveband band{kFc, 20e9, subcarriers, subcarriers / 8};
  const SCAConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_layout(layout, band, {kUser}, Assignment{{0}}, cfg));
  }
  state.SetComplexityN(subcarriers);
}
BENCHMARK(BM_OptimizeLayout)->RangeMultiplier(2)->Range(32, 256)->Complexity();

static void BM_Wmmse(benchmark::State& state) {
  const int users = static_cast<int>(state.range(0));
  Rng rng(5);
  CMat h(4, users);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < users; ++c) h(r, c) = rng.cnormal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(wmmse(h, 1.0, 64, 0.01));
  }
}
BENCHMARK(BM_Wmmse)->DenseRange(1, 4);

static void BM_FpaPipeline(benchmark::State& state) {
  LinkScenario scenario;
  scenario.layout = nominal_layout(2, 2, 16, 4, kLambda);
  scenario.band = Waveband{kFc, 20e9, 64, 8};
  scenario.users = {kUser, {9.0, -0.5, 0.2}, {12.0, 0.8, -0.4}, {7.0, -0.1, 0.6}};
  Rng rng(7);
  scenario.path_gains = draw_path_gains(rng, 64, 4);
  scenario.noise_power = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpa_pipeline(scenario));
  }
}
BENCHMARK(BM_FpaPipeline);

BENCHMARK_MAIN();
