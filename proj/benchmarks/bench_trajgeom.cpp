#include <benchmark/benchmark.h>

#include <memory>
#include <numeric>
#include <vector>

#include "trajgeom/baselines.hpp"
#include "trajgeom/dataset.hpp"
#include "trajgeom/geometry.hpp"
#include "trajgeom/objectives.hpp"
#include "trajgeom/optim.hpp"
#include "trajgeom/random.hpp"

using namespace trajgeom;

namespace {

ParamVector randv(RandomStream& s, std::size_t d) {
  std::vector<double> v(d);
  for (auto& x : v) x = s.gauss();
  return ParamVector(std::move(v));
}

void BM_Dot(benchmark::State& state) {
  RandomStream s(1, "bench");
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto a = randv(s, d), b = randv(s, d);
  for (auto _ : state) benchmark::DoNotOptimize(dot(a, b));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * d * 2 * sizeof(double)));
}
BENCHMARK(BM_Dot)->Arg(1 << 10)->Arg(10660)->Arg(1 << 20);

void BM_Measure(benchmark::State& state) {
  RandomStream s(2, "bench");
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto g = randv(s, d), w = randv(s, d), ws = randv(s, d);
  for (auto _ : state) benchmark::DoNotOptimize(measure(g, w, ws));
}
BENCHMARK(BM_Measure)->Arg(10660)->Arg(1 << 20);

// Reference MLP shape: 50 -> 100 -> 50 -> 10 on a 128-sample batch.
void BM_MlpGradient(benchmark::State& state) {
  RandomStream data(3, "data");
  auto set = std::make_shared<const Dataset>(gen_blobs(data, 1280, 50, 10, 1.0));
  MlpObjective mlp(set, {100, 50});
  RandomStream init(3, "init");
  const auto w = mlp.initial_point(init);
  std::vector<std::size_t> batch(static_cast<std::size_t>(state.range(0)));
  std::iota(batch.begin(), batch.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(mlp.evaluate(w, batch));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * batch.size()));
}
BENCHMARK(BM_MlpGradient)->Arg(64)->Arg(128)->Arg(512);

void BM_AdamStep(benchmark::State& state) {
  RandomStream s(4, "bench");
  const std::size_t d = 10660;
  auto w = randv(s, d);
  const auto g = randv(s, d);
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::adam;
  OptimizerState opt(cfg, d);
  for (auto _ : state) {
    opt.step(w, g, 1e-3);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_AdamStep);

void BM_RandomWalk(benchmark::State& state) {
  WalkConfig cfg;
  cfg.d = static_cast<std::size_t>(state.range(0));
  cfg.T = 50;
  cfg.replicates = 1;
  for (auto _ : state) benchmark::DoNotOptimize(random_walk(cfg));
}
BENCHMARK(BM_RandomWalk)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
