#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "fixtures/fixtures.hpp"
#include "socmap/error.hpp"
#include "socmap/samples.hpp"

using namespace socmap;

namespace {

std::filesystem::path write_csv(const std::string& name, const std::string& text) {
  const auto dir = fixtures::scratch_dir("samples_" + name);
  const auto path = dir / "s.csv";
  std::ofstream(path) << text;
  return path;
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

TEST(LoadSamples, ReadsCovariatesAndMissingMarkers) {
  const auto path = write_csv("ok", "id,x,y,soc,ndvi,twi\nA,1,2,1.5,0.3,NA\nB,3,4,2.5,,7\nC,5,6,0.5,0.1,8\n");
  const auto t = load_samples(path);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.feature_names(), (std::vector<std::string>{"ndvi", "twi"}));
  EXPECT_EQ(t.row(0).id, "A");
  EXPECT_EQ(t.row(2).target, 0.5);
  EXPECT_TRUE(is_missing(t.row(0).covariates[1]));
  EXPECT_TRUE(is_missing(t.row(1).covariates[0]));
  EXPECT_EQ(t.feature_index("twi"), 1u);
}

TEST(LoadSamples, HonoursExplicitSchema) {
  const auto path = write_csv("schema", "site,e,n,carbon,a,b\nA,1,2,1.5,0.3,9\nB,3,4,2.5,0.2,7\n");
  SampleSchema schema{"site", "e", "n", "carbon", {"b"}};
  const auto t = load_samples(path, schema);
  EXPECT_EQ(t.feature_names(), (std::vector<std::string>{"b"}));
  EXPECT_EQ(t.target_name(), "carbon");
  EXPECT_EQ(t.row(1).covariates[0], 7.0);
}

TEST(LoadSamples, ReportsStructuralProblems) {
  EXPECT_EQ(code_of([] { load_samples("/nonexistent/s.csv"); }), Errc::io);
  EXPECT_EQ(code_of([] { load_samples(write_csv("nosoc", "id,x,y,a\nA,1,2,3\n")); }), Errc::schema);
  EXPECT_EQ(code_of([] { load_samples(write_csv("dup", "id,x,y,soc,a\nA,1,2,3,4\nA,1,2,3,4\n")); }),
            Errc::duplicate);
  SampleSchema explicit_a;
  explicit_a.covariates = {"a"};
  EXPECT_EQ(code_of([&] { load_samples(write_csv("text", "id,x,y,soc,a\nA,1,2,3,high\n"), explicit_a); }),
            Errc::parse);
  EXPECT_EQ(code_of([] { load_samples(write_csv("short", "id,x,y,soc,a\nA,1,2,3\n")); }), Errc::parse);
}

TEST(LoadSamples, SkipsTextColumnsWhenCovariatesAreImplicit) {
  const auto t = load_samples(write_csv("implicit", "id,x,y,soc,a,zone\nA,1,2,3,4,north\nB,1,2,3,5,south\n"));
  EXPECT_EQ(t.feature_names(), (std::vector<std::string>{"a"}));
}

TEST(WriteSamples, RoundTrips) {
  auto t = fixtures::friedman1(20, 3);
  std::vector<SampleRow> rows = t.rows();
  rows[4].covariates[2] = kMissing;
  const SampleTable with_gap(rows, t.feature_names(), t.target_name());
  const auto dir = fixtures::scratch_dir("samples_roundtrip");
  write_samples(with_gap, dir / "t.csv");
  SampleSchema schema;
  schema.target_column = "target";
  const auto back = load_samples(dir / "t.csv", schema);
  ASSERT_EQ(back.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(back.row(i).target, with_gap.row(i).target);
    for (std::size_t j = 0; j < 10; ++j) {
      const double a = back.row(i).covariates[j], b = with_gap.row(i).covariates[j];
      EXPECT_TRUE(a == b || (std::isnan(a) && std::isnan(b)));
    }
  }
}

TEST(Describe, MatchesReferenceMoments) {
  // Reference values from scipy.stats (skew/kurtosis with bias=False).
  const std::vector<double> d = {2, 8, 0, 4, 1, 9, 9, 0, 3.5, 12.25};
  const auto s = describe(d);
  EXPECT_EQ(s.n, 10u);
  EXPECT_DOUBLE_EQ(s.mean, 4.875);
  EXPECT_NEAR(s.sd, 4.36725504941796, 1e-12);
  EXPECT_NEAR(s.cv, 100.0 * 4.36725504941796 / 4.875, 1e-10);
  EXPECT_NEAR(s.skewness, 0.425345316233158, 1e-12);
  EXPECT_NEAR(s.kurtosis, -1.3032504319618852, 1e-12);
  EXPECT_EQ(s.min, 0.0);
  EXPECT_EQ(s.max, 12.25);
}

TEST(Describe, IsOrderInvariantAndNeedsThreeValues) {
  std::vector<double> d = {2, 8, 0, 4, 1, 9, 9, 0, 3.5, 12.25};
  const auto a = describe(d);
  std::reverse(d.begin(), d.end());
  const auto b = describe(d);
  EXPECT_EQ(a.skewness, b.skewness);
  EXPECT_EQ(a.ks_p, b.ks_p);
  const std::vector<double> two = {1, 2};
  EXPECT_EQ(code_of([&] { describe(two); }), Errc::insufficient_data);
}

TEST(KolmogorovSmirnov, StatisticAndAsymptoticTail) {
  // Reference values from scipy.stats.kstest and scipy.stats.kstwobign.
  const std::vector<double> d = {2, 8, 0, 4, 1, 9, 9, 0, 3.5, 12.25};
  std::vector<double> z;
  for (double v : d) z.push_back((v - 4.875) / 4.36725504941796);
  EXPECT_NEAR(ks_test_normal(z).statistic, 0.17939840062272444, 1e-9);
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.26999967167735456, 1e-10);
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.0499996304316674, 1e-10);
  EXPECT_NEAR(kolmogorov_survival(0.5), 0.9639452436648751, 1e-10);
}

TEST(Transform, RoundTripsAndGuardsDomain) {
  const auto t = fixtures::landscape(30, 1).samples;
  const auto fwd = transform_target(t, TransformDirection::forward, 1.0);
  EXPECT_TRUE(fwd.transform().active());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_DOUBLE_EQ(fwd.row(i).target, std::log(t.row(i).target + 1.0));
  const auto back = transform_target(fwd, TransformDirection::backward);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(back.row(i).target, t.row(i).target, 1e-12);
  EXPECT_EQ(code_of([&] { transform_target(fwd, TransformDirection::forward); }), Errc::state);
  EXPECT_EQ(code_of([&] { transform_target(t, TransformDirection::backward); }), Errc::state);

  std::vector<SampleRow> rows = t.rows();
  rows[3].target = -1.0;
  const SampleTable bad(rows, t.feature_names(), t.target_name());
  EXPECT_EQ(code_of([&] { transform_target(bad, TransformDirection::forward, 1.0); }), Errc::domain);
}

TEST(Folds, PartitionRowsEvenly) {
  for (std::size_t n : {10u, 23u, 101u}) {
    const auto f = assign_folds(n, 10, 5);
    std::vector<int> seen(n, 0);
    for (std::size_t k = 0; k < 10; ++k) {
      const auto val = f.validation_rows(k);
      const auto train = f.training_rows(k);
      EXPECT_EQ(val.size() + train.size(), n);
      for (auto r : val) ++seen[r];
    }
    for (int s : seen) EXPECT_EQ(s, 1);
    const auto sizes = f.fold_sizes();
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
  }
  EXPECT_EQ(assign_folds(50, 5, 9), assign_folds(50, 5, 9));
  EXPECT_NE(assign_folds(50, 5, 9).fold_of, assign_folds(50, 5, 10).fold_of);
  EXPECT_EQ(code_of([] { assign_folds(10, 1, 0); }), Errc::configuration);
  EXPECT_EQ(code_of([] { assign_folds(3, 5, 0); }), Errc::configuration);
}

TEST(Impute, UsesColumnMedian) {
  std::vector<SampleRow> rows;
  const double a[] = {3, 1, kMissing, 7, 2};
  for (int i = 0; i < 5; ++i) rows.push_back({std::to_string(i), 0, 0, 1.0, {a[i], 1.0}});
  const SampleTable t(rows, {"a", "b"}, "soc");
  const auto filled = impute_missing(t);
  EXPECT_EQ(filled.row(2).covariates[0], 2.5);
  EXPECT_EQ(filled.row(0).covariates[0], 3.0);

  for (auto& r : rows) r.covariates[1] = kMissing;
  const SampleTable empty_col(rows, {"a", "b"}, "soc");
  EXPECT_EQ(code_of([&] { impute_missing(empty_col); }), Errc::imputation);
}

TEST(SampleTableInvariants, RejectsInconsistentRows) {
  std::vector<SampleRow> rows = {{"a", 0, 0, 1.0, {1.0}}, {"b", 0, 0, 2.0, {1.0, 2.0}}};
  EXPECT_EQ(code_of([&] { SampleTable(rows, {"f"}, "soc"); }), Errc::shape);
  rows[1].covariates = {2.0};
  rows[1].target = std::nan("");
  EXPECT_EQ(code_of([&] { SampleTable(rows, {"f"}, "soc"); }), Errc::data);
}
