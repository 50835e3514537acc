#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fixtures/fixtures.hpp"
#include "socmap/crossval.hpp"
#include "socmap/error.hpp"
#include "socmap/gasel.hpp"
#include "socmap/parallel.hpp"

using namespace socmap;

namespace {

GaConfig quick_config(std::uint64_t seed) {
  GaConfig c;
  c.population = 12;
  c.generations = 5;
  c.fitness_folds = 3;
  c.fitness_rf.ntree = 8;
  c.seed = seed;
  return c;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::state;
}

}  // namespace

TEST(Fitness, EqualsCrossValidatedForestRmse) {
  const auto table = fixtures::planted(90, 6, 3);
  const auto folds = assign_folds(table, 5, 4);
  const auto mask = FeatureMask::from_indices(6, std::vector<std::size_t>{0, 1, 4});
  auto spec = default_spec(Algorithm::RF, 77);
  std::get<RfParams>(spec.params).ntree = 100;
  const auto run = cross_validate(table, mask, spec, folds);
  const double f = fitness(mask, table, folds, std::get<RfParams>(spec.params), 77);
  EXPECT_NEAR(f, run.metrics.mean.rmse, 1e-12);
}

TEST(Fitness, CacheAvoidsRefits) {
  const auto table = fixtures::planted(60, 4, 5);
  const auto folds = assign_folds(table, 3, 4);
  const auto mask = FeatureMask::from_indices(4, std::vector<std::size_t>{1, 2});
  RfParams rf;
  rf.ntree = 10;
  FitnessCache cache;
  const double a = fitness(mask, table, folds, rf, 1, &cache);
  EXPECT_EQ(cache.fits(), 3u);
  const double b = fitness(mask, table, folds, rf, 1, &cache);
  EXPECT_EQ(a, b);
  EXPECT_EQ(cache.fits(), 3u);
  EXPECT_EQ(cache.size(), 1u);
  fitness(mask, table, folds, rf, 2, &cache);
  EXPECT_EQ(cache.size(), 2u);
}

TEST(GaConfigValidation, RejectsUnusableSettings) {
  auto c = quick_config(1);
  c.population = 11;
  EXPECT_EQ(code_of([&] { validate(c); }), Errc::configuration);
  c = quick_config(1);
  c.crossover_rate = 1.5;
  EXPECT_EQ(code_of([&] { validate(c); }), Errc::configuration);
  c = quick_config(1);
  c.generations = 0;
  EXPECT_EQ(code_of([&] { validate(c); }), Errc::configuration);
}

TEST(Evolve, IsDeterministicAndThreadInvariant) {
  const auto table = fixtures::planted(80, 8, 9);
  auto cfg = quick_config(4);
  cfg.threads = 1;
  const auto a = evolve(table, table.feature_names(), cfg);
  cfg.threads = 4;
  const auto b = evolve(table, table.feature_names(), cfg);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.best_rmse, b.best_rmse);
  ASSERT_EQ(a.trace.generations.size(), b.trace.generations.size());
  for (std::size_t i = 0; i < a.trace.generations.size(); ++i) {
    EXPECT_EQ(a.trace.generations[i].best_internal_rmse, b.trace.generations[i].best_internal_rmse);
    EXPECT_EQ(a.trace.generations[i].best_mask, b.trace.generations[i].best_mask);
  }
}

TEST(Evolve, TraceShapeAndElitism) {
  const auto table = fixtures::planted(80, 8, 10);
  auto cfg = quick_config(5);
  cfg.restarts = 2;
  const auto r = evolve(table, table.feature_names(), cfg);
  ASSERT_EQ(r.trace.generations.size(), 10u);
  EXPECT_EQ(r.trace.training_ids.size(), 80u);
  EXPECT_GT(r.trace.fitness_evaluations, 0u);
  double best = INFINITY;
  for (std::size_t i = 0; i < r.trace.generations.size(); ++i) {
    const auto& g = r.trace.generations[i];
    EXPECT_EQ(g.restart, i / 5);
    EXPECT_EQ(g.generation, i % 5 + 1);
    EXPECT_TRUE(g.best_mask.valid());
    EXPECT_LE(g.best_internal_rmse, g.mean_internal_rmse);
    if (i % 5 > 0) EXPECT_LE(g.best_internal_rmse, r.trace.generations[i - 1].best_internal_rmse);
    best = std::min(best, g.best_internal_rmse);
  }
  EXPECT_EQ(r.best_rmse, best);
  EXPECT_TRUE(r.best.test(0) || r.best.test(1));
}

TEST(Evolve, NeedsTwoCandidates) {
  const auto table = fixtures::planted(40, 1, 1);
  EXPECT_EQ(code_of([&] { evolve(table, table.feature_names(), quick_config(1)); }), Errc::configuration);
}

TEST(OuterSplit, IsADisjointCover) {
  const auto s = outer_split(103, 0.2, 6);
  EXPECT_EQ(s.holdout_rows.size() + s.train_rows.size(), 103u);
  std::set<std::size_t> all(s.train_rows.begin(), s.train_rows.end());
  for (auto r : s.holdout_rows) EXPECT_TRUE(all.insert(r).second);
  EXPECT_EQ(all.size(), 103u);
  EXPECT_EQ(code_of([] { outer_split(10, 1.0, 1); }), Errc::configuration);
}

TEST(ExternalValidation, FillsEveryGenerationAndDetectsLeakage) {
  const auto table = fixtures::planted(100, 6, 11);
  const auto split = outer_split(100, 0.25, 2);
  const auto train = table.subset(split.train_rows);
  auto r = evolve(train, table.feature_names(), quick_config(6));
  RfParams rf;
  rf.ntree = 20;
  auto trace = r.trace;
  external_validate(trace, table, split, rf, 3);
  for (const auto& g : trace.generations) EXPECT_TRUE(std::isfinite(g.external_rmse));

  auto leaky = r.trace;
  leaky.training_ids.push_back(table.row(split.holdout_rows.front()).id);
  EXPECT_EQ(code_of([&] { external_validate(leaky, table, split, rf, 3); }), Errc::leakage);

  OuterSplit overlap = split;
  overlap.holdout_rows.push_back(split.train_rows.front());
  EXPECT_EQ(code_of([&] { external_validate(trace, table, overlap, rf, 3); }), Errc::leakage);
}

TEST(Importance, SumsToHundredAndRanksPlantedFeatures) {
  const auto table = fixtures::planted(150, 5, 12);
  RfParams rf;
  rf.ntree = 60;
  const auto rep = importance(table, FeatureMask::all(5), rf, 3, 4);
  ASSERT_EQ(rep.features.size(), 5u);
  EXPECT_NEAR(std::accumulate(rep.percent.begin(), rep.percent.end(), 0.0), 100.0, 1e-9);
  for (double p : rep.percent) EXPECT_GE(p, 0.0);
  EXPECT_GT(rep.percent[1], rep.percent[0]);
  for (std::size_t j = 2; j < 5; ++j) EXPECT_GT(rep.percent[0], rep.percent[j]);
}

TEST(Importance, UninformativeColumnsShareEqually) {
  std::vector<SampleRow> rows;
  for (int i = 0; i < 30; ++i) rows.push_back({std::to_string(i), 0, 0, 5.0, {1.0 * i, 2.0 * (i % 3)}});
  const SampleTable flat(rows, {"a", "b"}, "soc");
  RfParams rf;
  rf.ntree = 10;
  const auto rep = importance(flat, FeatureMask::all(2), rf, 2, 1);
  EXPECT_DOUBLE_EQ(rep.percent[0], 50.0);
  EXPECT_DOUBLE_EQ(rep.percent[1], 50.0);
}

TEST(GaArtifacts, MaskJsonRoundTripAndTraceCsv) {
  const std::vector<std::string> names = {"ndvi", "twi", "slope"};
  const auto mask = FeatureMask::from_indices(3, std::vector<std::size_t>{0, 2});
  const auto dir = fixtures::scratch_dir("ga_artifacts");
  write_mask_json(mask, names, dir / "mask.json");
  EXPECT_EQ(read_mask_json(names, dir / "mask.json"), mask);
  std::ofstream(dir / "bad.json") << "{\"ndvi\": 1}";
  EXPECT_EQ(code_of([&] { read_mask_json(names, dir / "bad.json"); }), Errc::parse);

  GaTrace trace;
  trace.candidates = names;
  trace.generations.push_back({0, 1, 1.5, 2.0, NAN, mask});
  write_trace_csv(trace, dir / "trace.csv");
  std::ifstream in(dir / "trace.csv");
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header, "generation,best_internal_rmse,mean_internal_rmse,external_rmse,selected_count");
  EXPECT_EQ(line, "1,1.5,2,NA,2");
}
