#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "socmap/learners/spec.hpp"
#include "socmap/learners/tree.hpp"
#include "socmap/matrix.hpp"

namespace socmap {

struct LinearLeaf {
  double intercept = 0.0;
  std::vector<double> coef;

  bool operator==(const LinearLeaf&) const = default;
};

/// CART skeleton whose leaves hold ridge regressions on standardized inputs.
/// `leaves` is indexed by node id; entries for internal nodes stay empty.
struct LinearLeafTree {
  RegressionTree skeleton;
  std::vector<LinearLeaf> leaves;

  double predict_standardized(std::span<const double> xs) const;
  bool operator==(const LinearLeafTree&) const = default;
};

/// Committee of model trees in the spirit of Cubist. Member m > 0 is grown on
/// the adjusted target y - (f_{m-1}(x) - y); the committee predicts the mean
/// of its members. With neighbors > 0 the committee prediction f(x) is
/// corrected by the nearest training points:
///   sum_k w_k (y_k - f(x_k) + f(x)) / sum_k w_k,  w_k = 1 / (d_k + 0.5).
struct ModelTreeModel {
  Standardizer scaler;
  std::vector<LinearLeafTree> members;
  int neighbors = 0;
  Matrix train_x;                 // standardized, kept only when neighbors > 0
  std::vector<double> train_y;
  std::vector<double> train_fit;  // committee prediction at each training row

  double committee_standardized(std::span<const double> xs) const;
  double predict(std::span<const double> x) const;
  bool operator==(const ModelTreeModel&) const = default;
};

ModelTreeModel fit_model_tree(const Matrix& x, std::span<const double> y,
                              const ModelTreeParams& params, std::uint64_t seed);

}  // namespace socmap
