#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "socmap/learners/spec.hpp"
#include "socmap/learners/tree.hpp"
#include "socmap/matrix.hpp"

namespace socmap {

struct ForestModel {
  std::vector<RegressionTree> trees;
  double oob_rmse = std::numeric_limits<double>::quiet_NaN();

  double predict(std::span<const double> x) const;
  bool operator==(const ForestModel&) const = default;
};

/// Bagged CART trees with per-split feature subsampling. Tree t draws its
/// bootstrap sample and split candidates from derive_seed(seed, t), so the
/// result does not depend on the worker count.
ForestModel fit_random_forest(const Matrix& x, std::span<const double> y, const RfParams& params,
                              std::uint64_t seed);

/// Leaf values are stored already multiplied by eta, so a prediction is
/// base + sum of tree outputs.
struct BoostModel {
  double base = 0.0;
  double eta = 0.0;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const;
  bool operator==(const BoostModel&) const = default;
};

struct BoostFit {
  BoostModel model;
  std::vector<double> train_rmse;    // after each round, on the training rows
  std::vector<double> holdout_rmse;  // empty without early stopping
};

/// Squared-loss gradient boosting. With unit hessians the minimum child
/// weight is a minimum leaf sample count (at least 1).
BoostFit fit_xgb(const Matrix& x, std::span<const double> y, const XgbParams& params,
                 std::uint64_t seed);

}  // namespace socmap
