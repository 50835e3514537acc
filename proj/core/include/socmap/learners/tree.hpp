#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "socmap/matrix.hpp"
#include "socmap/random.hpp"

namespace socmap {

/// Internal nodes send x[feature] <= threshold to `left`. Leaves have
/// feature == -1 and carry `value`.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  int leaf_index(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }
  std::size_t leaf_count() const;
  int depth() const;

  bool operator==(const RegressionTree&) const = default;
};

struct TreeOptions {
  int max_depth = -1;          // negative: unlimited
  std::size_t min_leaf = 1;    // minimum samples in each child
  std::size_t mtry = 0;        // features tried per split; 0 = all
};

struct SplitChoice {
  int feature = -1;  // -1: no admissible split
  double threshold = 0.0;
  double gain = 0.0;  // reduction in sum of squared errors
};

/// Row indices of each column of `x` sorted by (value, row).
using ColumnOrder = std::vector<std::vector<std::uint32_t>>;
ColumnOrder presort_columns(const Matrix& x);

/// Greedy variance-reduction tree growth over a sample multiset. Thresholds
/// are midpoints between consecutive distinct feature values; ties in gain go
/// to the lower feature index, then the lower threshold.
class TreeBuilder {
 public:
  /// `presorted`, when given, must be presort_columns(x); it saves the
  /// per-tree sort when many trees are grown on the same matrix.
  TreeBuilder(const Matrix& x, std::span<const double> target, TreeOptions options,
              const ColumnOrder* presorted = nullptr);

  /// `samples` may contain repeats (bootstrap). `features` lists the columns
  /// eligible for splitting. `rng` is required when options.mtry restricts
  /// the candidates. When `leaf_samples` is given it receives, per node id,
  /// the samples that reached that node if it is a leaf.
  RegressionTree build(std::span<const std::size_t> samples, std::span<const std::size_t> features,
                       Rng* rng = nullptr,
                       std::vector<std::vector<std::size_t>>* leaf_samples = nullptr);

  SplitChoice best_split(std::span<const std::size_t> samples,
                         std::span<const std::size_t> features);

 private:
  const Matrix& x_;
  std::span<const double> y_;
  TreeOptions options_;
  const ColumnOrder* presorted_;
  std::vector<std::pair<double, double>> scratch_;
};

/// CART regression tree on all columns and all rows.
RegressionTree fit_cart(const Matrix& x, std::span<const double> y, int max_depth,
                        std::size_t min_leaf);

}  // namespace socmap
