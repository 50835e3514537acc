#include <algorithm>
#include <cmath>
#include <numeric>

#include "socmap/error.hpp"
#include "socmap/learners/ensemble.hpp"
#include "socmap/random.hpp"

namespace socmap {

double BoostModel::predict(std::span<const double> x) const {
  double f = base;
  for (const auto& t : trees) f += t.predict(x);
  return f;
}

namespace {

std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool, std::size_t k,
                                                    Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double rmse_over(std::span<const std::size_t> rows, std::span<const double> y,
                 std::span<const double> f) {
  double ss = 0.0;
  for (auto r : rows) ss += (y[r] - f[r]) * (y[r] - f[r]);
  return std::sqrt(ss / static_cast<double>(rows.size()));
}

}  // namespace

BoostFit fit_xgb(const Matrix& x, std::span<const double> y, const XgbParams& params,
                 std::uint64_t seed) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n != y.size()) fail(Errc::shape, "X rows and y length differ");
  if (n == 0 || p == 0) fail(Errc::insufficient_data, "boosting needs at least one row and column");

  Rng rng(seed);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  std::vector<std::size_t> train = all;
  std::vector<std::size_t> holdout;
  const auto n_holdout =
      static_cast<std::size_t>(std::llround(params.holdout_fraction * static_cast<double>(n)));
  const bool early_stop = params.early_stopping_rounds > 0 && n_holdout >= 1 && n - n_holdout >= 2;
  if (early_stop) {
    std::vector<std::size_t> perm = all;
    std::shuffle(perm.begin(), perm.end(), rng);
    holdout.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_holdout));
    train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_holdout), perm.end());
    std::sort(holdout.begin(), holdout.end());
    std::sort(train.begin(), train.end());
  }

  BoostFit fit;
  double base = 0.0;
  for (auto r : train) base += y[r];
  base /= static_cast<double>(train.size());
  fit.model.base = base;
  fit.model.eta = params.eta;

  std::vector<double> f(n, base);
  std::vector<double> residual(n, 0.0);
  const auto min_leaf =
      static_cast<std::size_t>(std::max(1.0, std::ceil(params.min_child_weight)));
  const auto n_rows = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(train.size()))));
  const auto n_cols = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.colsample_bytree * static_cast<double>(p))));
  std::vector<std::size_t> features(p);
  std::iota(features.begin(), features.end(), 0);
  const ColumnOrder presorted = presort_columns(x);
  TreeBuilder builder(x, residual, TreeOptions{params.max_depth, min_leaf, 0}, &presorted);

  double best_holdout = std::numeric_limits<double>::infinity();
  std::size_t best_rounds = 0;

  for (int round = 0; round < params.rounds; ++round) {
    for (auto r : train) residual[r] = y[r] - f[r];
    const auto rows = n_rows < train.size() ? sample_without_replacement(train, n_rows, rng) : train;
    const auto cols = n_cols < p ? sample_without_replacement(features, n_cols, rng) : features;

    RegressionTree tree = builder.build(rows, cols);
    for (auto& node : tree.nodes) node.value *= params.eta;
    for (std::size_t i = 0; i < n; ++i) f[i] += tree.predict(x.row(i));
    fit.model.trees.push_back(std::move(tree));
    fit.train_rmse.push_back(rmse_over(train, y, f));

    if (early_stop) {
      const double h = rmse_over(holdout, y, f);
      fit.holdout_rmse.push_back(h);
      if (h < best_holdout) {
        best_holdout = h;
        best_rounds = fit.model.trees.size();
      } else if (fit.model.trees.size() - best_rounds >=
                 static_cast<std::size_t>(params.early_stopping_rounds)) {
        break;
      }
    }
  }
  if (early_stop && best_rounds < fit.model.trees.size()) {
    fit.model.trees.resize(best_rounds);
    fit.train_rmse.resize(best_rounds);
    fit.holdout_rmse.resize(best_rounds);
  }
  return fit;
}

}  // namespace socmap
