#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "socmap/crossval.hpp"
#include "socmap/learners/ensemble.hpp"
#include "socmap/learners/tree.hpp"
#include "socmap/mapping.hpp"
#include "socmap/parallel.hpp"
#include "socmap/raster/covariates.hpp"
#include "socmap/raster/terrain.hpp"

using namespace socmap;

namespace {

struct Data {
  Matrix x;
  std::vector<double> y;
};

Data friedman(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> e(0.0, 1.0);
  Data d{Matrix(n, p), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) d.x(i, j) = u(rng);
    const auto r = d.x.row(i);
    d.y[i] = 10.0 * std::sin(3.141592653589793 * r[0] * r[1]) + 20.0 * (r[2] - 0.5) * (r[2] - 0.5) +
             10.0 * r[3] + 5.0 * r[4] + e(rng);
  }
  return d;
}

GridDef square(std::size_t n) {
  GridDef d;
  d.nrows = n;
  d.ncols = n;
  d.cellsize = 30.0;
  return d;
}

RasterGrid wavy(std::size_t n, double phase) {
  RasterGrid g(square(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) g(r, c) = 0.3 + 0.2 * std::sin(0.05 * r + phase) * std::cos(0.07 * c);
  return g;
}

void BM_CartFit(benchmark::State& state) {
  const auto d = friedman(static_cast<std::size_t>(state.range(0)), 10, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_cart(d.x, d.y, 12, 5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CartFit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ForestFit(benchmark::State& state) {
  const auto d = friedman(500, 10, 2);
  RfParams rf;
  rf.ntree = 100;
  set_default_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_random_forest(d.x, d.y, rf, 3));
  set_default_threads(0);
}
BENCHMARK(BM_ForestFit)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_BandIndex(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RasterStack s;
  s.add("NIR", wavy(n, 0.0));
  s.add("RED", wavy(n, 1.0));
  s.add("BLUE", wavy(n, 2.0));
  for (auto _ : state) benchmark::DoNotOptimize(band_index(s, "EVI"));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_BandIndex)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_FlowAccumulation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RasterGrid dem = wavy(n, 0.5);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) dem(r, c) += 0.01 * static_cast<double>(r + c);
  for (auto _ : state) benchmark::DoNotOptimize(terrain(dem, TerrainAttribute::flow_accumulation));
}
BENCHMARK(BM_FlowAccumulation)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_PredictMap(benchmark::State& state) {
  const std::size_t n = 400;
  std::vector<SampleRow> rows;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 0.5);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng);
    rows.push_back({std::to_string(i), 0.0, 0.0, 5.0 + 10.0 * a - 4.0 * b, {a, b}});
  }
  const SampleTable table(rows, {"A", "B"}, "soc");
  auto spec = default_spec(Algorithm::RF, 1);
  std::get<RfParams>(spec.params).ntree = 100;
  const auto run = cross_validate(table, FeatureMask::all(2), spec, assign_folds(table, 5, 1));
  RasterStack stack;
  stack.add("A", wavy(static_cast<std::size_t>(state.range(0)), 0.0));
  stack.add("B", wavy(static_cast<std::size_t>(state.range(0)), 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(predict_map(run, stack));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_PredictMap)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
