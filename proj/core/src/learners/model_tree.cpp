#include "socmap/learners/model_tree.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "socmap/error.hpp"

namespace socmap {

namespace {

LinearLeaf fit_ridge(const Matrix& xs, std::span<const double> y, std::span<const std::size_t> rows,
                     double ridge) {
  const std::size_t p = xs.cols();
  const std::size_t m = rows.size();
  LinearLeaf leaf;
  leaf.coef.assign(p, 0.0);
  double y_mean = 0.0;
  for (auto r : rows) y_mean += y[r];
  y_mean /= static_cast<double>(m);
  leaf.intercept = y_mean;
  if (m < 2) return leaf;

  Eigen::VectorXd x_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (auto r : rows) {
    for (std::size_t c = 0; c < p; ++c) x_mean[static_cast<Eigen::Index>(c)] += xs(r, c);
  }
  x_mean /= static_cast<double>(m);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  Eigen::VectorXd d(static_cast<Eigen::Index>(p));
  for (auto r : rows) {
    for (std::size_t c = 0; c < p; ++c) d[static_cast<Eigen::Index>(c)] = xs(r, c) - x_mean[static_cast<Eigen::Index>(c)];
    a.noalias() += d * d.transpose();
    b.noalias() += d * (y[r] - y_mean);
  }
  a.diagonal().array() += ridge > 0.0 ? ridge : 1e-10;
  const Eigen::VectorXd beta = a.ldlt().solve(b);
  if (!beta.allFinite()) return leaf;
  for (std::size_t c = 0; c < p; ++c) leaf.coef[c] = beta[static_cast<Eigen::Index>(c)];
  leaf.intercept = y_mean - beta.dot(x_mean);
  return leaf;
}

}  // namespace

double LinearLeafTree::predict_standardized(std::span<const double> xs) const {
  const auto& leaf = leaves[static_cast<std::size_t>(skeleton.leaf_index(xs))];
  double f = leaf.intercept;
  for (std::size_t c = 0; c < leaf.coef.size(); ++c) f += leaf.coef[c] * xs[c];
  return f;
}

double ModelTreeModel::committee_standardized(std::span<const double> xs) const {
  double sum = 0.0;
  for (const auto& m : members) sum += m.predict_standardized(xs);
  return sum / static_cast<double>(members.size());
}

double ModelTreeModel::predict(std::span<const double> x) const {
  std::vector<double> xs(x.size());
  scaler.apply_row(x, xs);
  const double f = committee_standardized(xs);
  if (neighbors <= 0 || train_y.empty()) return f;

  const std::size_t n = train_y.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    const auto row = train_x.row(i);
    for (std::size_t c = 0; c < xs.size(); ++c) d2 += (row[c] - xs[c]) * (row[c] - xs[c]);
    dist[i] = {std::sqrt(d2), i};
  }
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(neighbors), n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const auto [d, i] = dist[j];
    const double w = 1.0 / (d + 0.5);
    num += w * (train_y[i] - train_fit[i] + f);
    den += w;
  }
  return num / den;
}

ModelTreeModel fit_model_tree(const Matrix& x, std::span<const double> y,
                              const ModelTreeParams& params, std::uint64_t seed) {
  (void)seed;  // growth is deterministic
  const std::size_t n = x.rows();
  if (n != y.size()) fail(Errc::shape, "X rows and y length differ");
  if (n == 0 || x.cols() == 0) fail(Errc::insufficient_data, "model tree needs data");
  if (params.committees < 1) fail(Errc::spec, "ModelTree.committees must be >= 1");

  ModelTreeModel model;
  model.scaler = Standardizer::fit(x);
  model.neighbors = params.neighbors;
  const Matrix xs = model.scaler.apply(x);

  std::vector<std::size_t> samples(n), features(x.cols());
  std::iota(samples.begin(), samples.end(), 0);
  std::iota(features.begin(), features.end(), 0);

  std::vector<double> target(y.begin(), y.end());
  std::vector<double> member_fit(n);
  std::vector<double> committee_sum(n, 0.0);
  for (int m = 0; m < params.committees; ++m) {
    if (m > 0) {
      for (std::size_t i = 0; i < n; ++i) target[i] = y[i] - (member_fit[i] - y[i]);
    }
    TreeBuilder builder(xs, target,
                        TreeOptions{params.max_depth, static_cast<std::size_t>(params.min_leaf), 0});
    std::vector<std::vector<std::size_t>> leaf_rows;
    LinearLeafTree member;
    member.skeleton = builder.build(samples, features, nullptr, &leaf_rows);
    member.leaves.resize(member.skeleton.nodes.size());
    for (std::size_t node = 0; node < member.skeleton.nodes.size(); ++node) {
      if (!member.skeleton.nodes[node].is_leaf()) continue;
      member.leaves[node] = fit_ridge(xs, target, leaf_rows[node], params.ridge);
    }
    for (std::size_t i = 0; i < n; ++i) {
      member_fit[i] = member.predict_standardized(xs.row(i));
      committee_sum[i] += member_fit[i];
    }
    model.members.push_back(std::move(member));
  }

  if (params.neighbors > 0) {
    model.train_x = xs;
    model.train_y.assign(y.begin(), y.end());
    model.train_fit.resize(n);
    for (std::size_t i = 0; i < n; ++i) model.train_fit[i] = model.committee_standardized(xs.row(i));
  }
  return model;
}

}  // namespace socmap
