#include <cmath>
#include <numeric>

#include "socmap/error.hpp"
#include "socmap/learners/ensemble.hpp"
#include "socmap/parallel.hpp"
#include "socmap/random.hpp"

namespace socmap {

double ForestModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

ForestModel fit_random_forest(const Matrix& x, std::span<const double> y, const RfParams& params,
                              std::uint64_t seed) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n != y.size()) fail(Errc::shape, "X rows and y length differ");
  if (n == 0 || p == 0) fail(Errc::insufficient_data, "random forest needs at least one row and column");
  if (params.ntree < 1) fail(Errc::spec, "RF.ntree must be >= 1");
  const std::size_t mtry = params.mtry ? static_cast<std::size_t>(*params.mtry)
                                       : static_cast<std::size_t>(std::ceil(std::sqrt(double(p))));
  if (mtry < 1 || mtry > p) {
    fail(Errc::spec, "RF.mtry=" + std::to_string(mtry) + " exceeds the " + std::to_string(p) +
                         " available features");
  }

  const auto ntree = static_cast<std::size_t>(params.ntree);
  ForestModel model;
  model.trees.resize(ntree);
  std::vector<std::vector<std::uint32_t>> in_bag(ntree);
  std::vector<std::size_t> features(p);
  std::iota(features.begin(), features.end(), 0);
  const ColumnOrder presorted = presort_columns(x);

  parallel_for(ntree, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> sample(n);
    std::vector<std::uint32_t> counts(n, 0);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> draw(0, n - 1);
      for (auto& s : sample) {
        s = draw(rng);
        ++counts[s];
      }
      std::sort(sample.begin(), sample.end());
    } else {
      std::iota(sample.begin(), sample.end(), 0);
      std::fill(counts.begin(), counts.end(), 1);
    }
    TreeBuilder builder(x, y, TreeOptions{-1, static_cast<std::size_t>(params.min_leaf), mtry},
                        &presorted);
    model.trees[t] = builder.build(sample, features, &rng);
    in_bag[t] = std::move(counts);
  });

  std::vector<double> oob_sum(n, 0.0);
  std::vector<std::size_t> oob_count(n, 0);
  for (std::size_t t = 0; t < ntree; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[t][i] == 0) {
        oob_sum[i] += model.trees[t].predict(x.row(i));
        ++oob_count[i];
      }
    }
  }
  double ss = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (oob_count[i] == 0) continue;
    const double d = oob_sum[i] / static_cast<double>(oob_count[i]) - y[i];
    ss += d * d;
    ++m;
  }
  if (m > 0) model.oob_rmse = std::sqrt(ss / static_cast<double>(m));
  return model;
}

}  // namespace socmap
