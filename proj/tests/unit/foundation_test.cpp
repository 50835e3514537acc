#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>

#include "socmap/error.hpp"
#include "socmap/mask.hpp"
#include "socmap/matrix.hpp"
#include "socmap/parallel.hpp"
#include "socmap/random.hpp"

using namespace socmap;

TEST(ExitCodes, FollowTheDocumentedContract) {
  EXPECT_EQ(exit_code(Errc::io), 2);
  EXPECT_EQ(exit_code(Errc::convergence), 4);
  EXPECT_EQ(exit_code(Errc::training), 4);
  for (auto c : {Errc::schema, Errc::parse, Errc::configuration, Errc::spec, Errc::leakage, Errc::registry,
                 Errc::dependency, Errc::alignment, Errc::insufficient_data}) {
    EXPECT_EQ(exit_code(c), 3) << to_string(c);
  }
}

TEST(ErrorType, CarriesCodeAndMessage) {
  try {
    fail(Errc::extent, "outside");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::extent);
    EXPECT_NE(std::string(e.what()).find("outside"), std::string::npos);
  }
}

TEST(DeriveSeed, IsDeterministicAndSpreadsStreams) {
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  EXPECT_EQ(derive_seed(7, "folds"), derive_seed(7, "folds"));
  std::set<std::uint64_t> seen;
  for (std::uint64_t parent = 0; parent < 20; ++parent) {
    for (std::uint64_t s = 0; s < 50; ++s) seen.insert(derive_seed(parent, s));
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(1, "ga"), derive_seed(1, "folds"));
  EXPECT_NE(derive_seed(1, "ga"), derive_seed(2, "ga"));
}

TEST(DeriveSeed, MatchesSplitMixReference) {
  // First output of the reference SplitMix64 generator seeded with 0.
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ParallelFor, RethrowsLowestIndexedFailure) {
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) fail(Errc::data, "row " + std::to_string(i));
    }, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 17"), std::string::npos);
  }
}

TEST(ParallelFor, NestedCallsRunSerially) {
  std::atomic<int> total{0};
  parallel_for(8, [&](std::size_t) { parallel_for(8, [&](std::size_t) { ++total; }, 4); }, 4);
  EXPECT_EQ(total.load(), 64);
}

TEST(MatrixOps, SelectsRowsAndColumns) {
  Matrix m(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6});
  const std::size_t rows[] = {2, 0, 2};
  const auto r = m.select_rows(rows);
  EXPECT_EQ(r.rows(), 3u);
  EXPECT_EQ(r(0, 1), 6.0);
  EXPECT_EQ(r(1, 0), 1.0);
  const std::size_t cols[] = {1};
  const auto c = m.select_cols(cols);
  EXPECT_EQ(c.column(0), (std::vector<double>{2, 4, 6}));
}

TEST(StandardizerFit, CentresAndScalesColumns) {
  Matrix m(4, 2, std::vector<double>{1, 5, 2, 5, 3, 5, 4, 5});
  const auto s = Standardizer::fit(m);
  const auto z = s.apply(m);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    sum += z(i, 0);
    sq += z(i, 0) * z(i, 0);
    EXPECT_EQ(z(i, 1), 0.0);
  }
  EXPECT_NEAR(sum, 0.0, 1e-12);
  // Sample SD scaling gives sum of squares n - 1; population SD gives n.
  EXPECT_TRUE(std::fabs(sq - 3.0) < 1e-12 || std::fabs(sq - 4.0) < 1e-12);
}

TEST(Mask, ConvertsBetweenNamesIndicesAndBits) {
  const std::vector<std::string> names = {"a", "b", "c", "d"};
  const std::vector<std::string> pick = {"d", "b"};
  const auto m = FeatureMask::from_names(names, pick);
  EXPECT_EQ(m.to_string(), "0101");
  EXPECT_EQ(m.selected_count(), 2u);
  EXPECT_EQ(m.indices(), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(m.names(names), (std::vector<std::string>{"b", "d"}));
  EXPECT_TRUE(m.valid());
  EXPECT_FALSE(FeatureMask(std::vector<std::uint8_t>(4, 0)).valid());
  const std::vector<std::string> bad = {"z"};
  EXPECT_THROW(FeatureMask::from_names(names, bad), Error);
}
