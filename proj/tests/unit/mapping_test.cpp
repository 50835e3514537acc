#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures/fixtures.hpp"
#include "socmap/crossval.hpp"
#include "socmap/error.hpp"
#include "socmap/mapping.hpp"

using namespace socmap;

namespace {

struct MappedRun {
  fixtures::Landscape land;
  CvRun run;
};

const MappedRun& mapped_run() {
  static const MappedRun m = [] {
    MappedRun out{fixtures::landscape(60, 3, 8), {}};
    const auto table = transform_target(out.land.samples, TransformDirection::forward, 1.0);
    auto spec = default_spec(Algorithm::RF, 5);
    std::get<RfParams>(spec.params).ntree = 100;
    out.run = cross_validate(table, FeatureMask::all(table.feature_count()), spec, assign_folds(table, 4, 2));
    return out;
  }();
  return m;
}

bool share_letter(const std::string& a, const std::string& b) {
  return a.find_first_of(b) != std::string::npos;
}

}  // namespace

TEST(EnsembleInterval, MeanSdAndZeroFloor) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 6.0};
  IntervalOptions opt;
  opt.z = 2.0;
  const auto iv = ensemble_interval(v, opt);
  const double sd = std::sqrt((4.0 + 1.0 + 0.0 + 9.0) / 3.0);
  EXPECT_DOUBLE_EQ(iv.mean, 3.0);
  EXPECT_DOUBLE_EQ(iv.sd, sd);
  EXPECT_DOUBLE_EQ(iv.upper, 3.0 + 2.0 * sd);
  EXPECT_EQ(iv.lower, 0.0);
  opt.floor_zero = false;
  EXPECT_DOUBLE_EQ(ensemble_interval(v, opt).lower, 3.0 - 2.0 * sd);
  opt.floor_zero = true;
  const std::vector<double> neg = {-4.0, -2.0};
  EXPECT_LT(ensemble_interval(neg, opt).lower, -3.0);
  const std::vector<double> tight = {5.0, 5.2, 4.8};
  const auto t = ensemble_interval(tight, {});
  EXPECT_DOUBLE_EQ(t.mean - t.lower, t.upper - t.mean);
  EXPECT_THROW(ensemble_interval(std::vector<double>{1.0}, {}), Error);
}

TEST(PredictMap, MatchesPerPixelLoopExactly) {
  const auto& m = mapped_run();
  for (int threads : {1, 3}) {
    IntervalOptions opt;
    opt.threads = threads;
    const auto b = predict_map(m.run, m.land.stack, opt);
    const auto& def = m.land.stack.def();
    const std::size_t k = m.run.fold_models.size();
    for (std::size_t r = 0; r < def.nrows; ++r) {
      for (std::size_t c = 0; c < def.ncols; ++c) {
        Matrix x(1, m.run.features.size());
        for (std::size_t l = 0; l < m.run.features.size(); ++l) x(0, l) = m.land.stack.at(m.run.features[l])(r, c);
        std::vector<double> v;
        for (const auto& model : m.run.fold_models) v.push_back(std::exp(predict(model, x)[0]) - 1.0);
        double sum = 0.0;
        for (double p : v) sum += p;
        const double mean = sum / static_cast<double>(k);
        double ss = 0.0;
        for (double p : v) ss += (p - mean) * (p - mean);
        const double sd = std::sqrt(ss / static_cast<double>(k - 1));
        ASSERT_EQ(b.mean(r, c), mean);
        ASSERT_EQ(b.sd(r, c), sd);
        ASSERT_EQ(b.upper(r, c), mean + 1.64 * sd);
        ASSERT_LE(b.lower(r, c), b.mean(r, c));
        ASSERT_GE(b.lower(r, c), 0.0);
      }
    }
  }
}

TEST(PredictMap, NodataPixelsStayNodataAndMissingLayersFail) {
  const auto& m = mapped_run();
  RasterStack holed;
  for (const auto& [name, g] : m.land.stack.layers()) {
    RasterGrid copy = g;
    if (name == m.run.features.front()) copy(2, 5) = kNodata;
    holed.add(name, copy);
  }
  const auto b = predict_map(m.run, holed);
  EXPECT_TRUE(b.mean.is_nodata(2, 5));
  EXPECT_TRUE(b.upper.is_nodata(2, 5));
  EXPECT_FALSE(b.mean.is_nodata(2, 4));

  RasterStack partial;
  partial.add(m.run.features.front(), m.land.stack.at(m.run.features.front()));
  try {
    predict_map(m.run, partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dependency);
  }
}

TEST(Coverage, HandCountedPartition) {
  Matrix real(4, 2);
  const double rows[4][2] = {{1.0, 3.0}, {10.0, 10.0}, {2.0, 4.0}, {5.0, 7.0}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j) real(i, j) = rows[i][j];
  // Intervals with z = 1: [0.586, 3.414], [10, 10], [1.586, 4.414], [4.586, 7.414].
  IntervalOptions opt;
  opt.z = 1.0;
  const std::vector<double> observed = {2.0, 10.0, 5.0, 4.0};
  const auto rep = coverage(real, observed, opt);
  EXPECT_EQ(rep.n_total, 4u);
  EXPECT_EQ(rep.n_inside, 2u);
  EXPECT_EQ(rep.n_above, 1u);
  EXPECT_EQ(rep.n_below, 1u);
  EXPECT_DOUBLE_EQ(rep.pct_inside + rep.pct_below + rep.pct_above, 100.0);
  const auto j = coverage_to_json(rep);
  EXPECT_EQ(j.at("n_inside"), 2);
}

TEST(Coverage, RunBasedCountsPartitionTheSamples) {
  const auto& m = mapped_run();
  const auto table = transform_target(m.land.samples, TransformDirection::forward, 1.0);
  for (bool exclude : {false, true}) {
    const auto rep = coverage(m.run, table, {}, exclude);
    EXPECT_EQ(rep.n_total, table.size());
    EXPECT_EQ(rep.n_inside + rep.n_below + rep.n_above, rep.n_total);
  }
  const auto real = fold_realizations(m.run, table, true);
  for (std::size_t i = 0; i < table.size(); ++i) EXPECT_TRUE(std::isnan(real(i, m.run.folds.fold_of[i])));
}

TEST(Welch, MatchesReferenceValues) {
  const std::vector<double> a = {4.1, 5.3, 6.2, 5.9, 4.8}, b = {6.9, 7.4, 8.1, 6.6, 7.7, 8.0};
  EXPECT_NEAR(welch_p_value(a, b), 0.0017692705303294178, 1e-12);
  const std::vector<double> c = {1, 2, 3, 4}, d = {1.5, 2.5, 3.5, 4.5, 5.5};
  EXPECT_NEAR(welch_p_value(c, d), 0.33108326983868364, 1e-12);
  EXPECT_DOUBLE_EQ(welch_p_value(c, d), welch_p_value(d, c));
  const std::vector<double> k1 = {2, 2, 2}, k2 = {2, 2}, k3 = {3, 3};
  EXPECT_EQ(welch_p_value(k1, k2), 1.0);
  EXPECT_EQ(welch_p_value(k1, k3), 0.0);
  EXPECT_THROW(welch_p_value(std::vector<double>{1.0}, c), Error);
}

TEST(Stratify, LettersShareExactlyWhenNotSignificant) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> values;
    std::vector<std::string> labels;
    std::uniform_int_distribution<int> groups(2, 6);
    const int g = groups(rng);
    for (int c = 0; c < g; ++c) {
      std::normal_distribution<double> dist(0.4 * c * (trial % 3), 1.0);
      for (int i = 0; i < 8; ++i) {
        values.push_back(dist(rng));
        labels.push_back("c" + std::to_string(c));
      }
    }
    const auto s = stratify(values, labels, 0.05);
    ASSERT_EQ(s.rows.size(), static_cast<std::size_t>(g));
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      EXPECT_FALSE(s.rows[i].letters.empty());
      if (i > 0) EXPECT_GE(s.rows[i - 1].mean, s.rows[i].mean);
      for (std::size_t j = i + 1; j < s.rows.size(); ++j) {
        EXPECT_EQ(share_letter(s.rows[i].letters, s.rows[j].letters), s.p_values[i][j] >= 0.05)
            << "trial " << trial << " rows " << i << "," << j;
      }
    }
    EXPECT_NE(s.rows.front().letters.find('A'), std::string::npos);
  }
}

TEST(Stratify, GridsDropSparseClassesWithWarning) {
  GridDef d;
  d.nrows = 3;
  d.ncols = 3;
  RasterGrid values(d, std::vector<double>{1, 2, 3, 10, 11, 12, 5, kNodata, 7});
  RasterGrid classes(d, std::vector<double>{1, 1, 1, 2, 2, 2, 3, 3, kNodata});
  const auto s = stratify(values, classes);
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[0].label, "2");
  EXPECT_DOUBLE_EQ(s.rows[0].mean, 11.0);
  EXPECT_DOUBLE_EQ(s.rows[1].cv, 100.0 * 1.0 / 2.0);
  EXPECT_EQ(s.warnings.size(), 1u);
  EXPECT_EQ(s.rows[0].letters, "A");
  EXPECT_EQ(s.rows[1].letters, "B");

  const auto path = fixtures::scratch_dir("stratify") / "s.csv";
  write_stratified_csv(s, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "class,n,mean,cv,letters");
  std::getline(in, line);
  EXPECT_EQ(line, "2,3,11,9.090909090909092,A");
}
