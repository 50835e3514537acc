#include "socmap/learners/tree.hpp"

#include <algorithm>
#include <numeric>

#include "socmap/error.hpp"

namespace socmap {

int RegressionTree::leaf_index(std::span<const double> x) const {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return node;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

ColumnOrder presort_columns(const Matrix& x) {
  ColumnOrder order(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& o = order[f];
    o.resize(x.rows());
    std::iota(o.begin(), o.end(), 0u);
    std::stable_sort(o.begin(), o.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
  }
  return order;
}

TreeBuilder::TreeBuilder(const Matrix& x, std::span<const double> target, TreeOptions options,
                         const ColumnOrder* presorted)
    : x_(x), y_(target), options_(options), presorted_(presorted) {
  if (options_.min_leaf < 1) options_.min_leaf = 1;
}

SplitChoice TreeBuilder::best_split(std::span<const std::size_t> samples,
                                    std::span<const std::size_t> features) {
  SplitChoice best;
  const std::size_t n = samples.size();
  const std::size_t min_leaf = options_.min_leaf;
  if (n < 2 * min_leaf) return best;

  double mean = 0.0;
  for (auto s : samples) mean += y_[s];
  mean /= static_cast<double>(n);

  scratch_.resize(n);
  for (auto f : features) {
    for (std::size_t i = 0; i < n; ++i) {
      scratch_[i] = {x_(samples[i], f), y_[samples[i]] - mean};
    }
    std::sort(scratch_.begin(), scratch_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (scratch_.front().first == scratch_.back().first) continue;

    double total = 0.0;
    for (const auto& p : scratch_) total += p.second;
    const double parent = total * total / static_cast<double>(n);

    double left = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left += scratch_[i].second;
      const std::size_t nl = i + 1;
      if (scratch_[i].first == scratch_[i + 1].first) continue;
      if (nl < min_leaf || n - nl < min_leaf) continue;
      const double right = total - left;
      const double gain = left * left / static_cast<double>(nl) +
                          right * right / static_cast<double>(n - nl) - parent;
      if (gain > best.gain) {
        const double a = scratch_[i].first;
        const double b = scratch_[i + 1].first;
        double mid = std::midpoint(a, b);
        if (!(mid < b)) mid = a;
        best = {static_cast<int>(f), mid, gain};
      }
    }
  }
  return best;
}

RegressionTree TreeBuilder::build(std::span<const std::size_t> samples,
                                  std::span<const std::size_t> features, Rng* rng,
                                  std::vector<std::vector<std::size_t>>* leaf_samples) {
  if (samples.empty()) fail(Errc::insufficient_data, "cannot grow a tree on zero samples");
  const bool restrict = options_.mtry > 0 && options_.mtry < features.size();
  if (restrict && rng == nullptr) fail(Errc::configuration, "feature subsampling needs an RNG");

  // Samples are addressed by position 0..m-1. Each feature slot keeps the
  // positions sorted by value; a node owns the same [begin, end) range in
  // every slot, and splits partition each slot stably.
  const std::size_t m = samples.size();
  const std::size_t nf = features.size();
  std::vector<double> target(m);
  for (std::size_t i = 0; i < m; ++i) target[i] = y_[samples[i]];
  std::vector<double> values(nf * m);
  std::vector<std::uint32_t> order(nf * m);
  for (std::size_t k = 0; k < nf; ++k) {
    double* v = values.data() + k * m;
    for (std::size_t i = 0; i < m; ++i) v[i] = x_(samples[i], features[k]);
  }

  if (presorted_ != nullptr) {
    // Group positions by source row, then walk each column's row order.
    const std::size_t n = x_.rows();
    std::vector<std::uint32_t> start(n + 1, 0);
    for (auto s : samples) ++start[s + 1];
    for (std::size_t r = 0; r < n; ++r) start[r + 1] += start[r];
    std::vector<std::uint32_t> grouped(m);
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < m; ++i) grouped[fill[samples[i]]++] = static_cast<std::uint32_t>(i);
    for (std::size_t k = 0; k < nf; ++k) {
      std::uint32_t* o = order.data() + k * m;
      std::size_t w = 0;
      for (auto r : (*presorted_)[features[k]]) {
        for (auto j = start[r]; j < start[r + 1]; ++j) o[w++] = grouped[j];
      }
    }
  } else {
    for (std::size_t k = 0; k < nf; ++k) {
      std::uint32_t* o = order.data() + k * m;
      const double* v = values.data() + k * m;
      std::iota(o, o + m, 0u);
      std::stable_sort(o, o + m, [&](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
    }
  }

  std::vector<std::uint32_t> members(m);  // node membership in original order
  std::iota(members.begin(), members.end(), 0u);
  std::vector<std::uint8_t> goes_left(m);
  std::vector<std::uint32_t> buffer(m);
  std::vector<std::size_t> slots(nf);
  std::iota(slots.begin(), slots.end(), 0);
  std::vector<std::size_t> candidates;

  auto stable_split = [&](std::uint32_t* first, std::size_t count) {
    std::size_t l = 0, r = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (goes_left[first[i]]) {
        first[l++] = first[i];
      } else {
        buffer[r++] = first[i];
      }
    }
    std::copy(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(r), first + l);
    return l;
  };

  RegressionTree tree;
  if (leaf_samples) leaf_samples->clear();
  struct Pending {
    int node;
    std::size_t begin;
    std::size_t end;
    int depth;
  };
  tree.nodes.emplace_back();
  std::vector<Pending> stack{{0, 0, m, 0}};
  const std::size_t min_leaf = options_.min_leaf;

  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();
    const std::size_t n = job.end - job.begin;
    const std::uint32_t* node_members = members.data() + job.begin;

    double sum = 0.0;
    bool constant = true;
    const double first = target[node_members[0]];
    for (std::size_t i = 0; i < n; ++i) {
      const double t = target[node_members[i]];
      sum += t;
      constant = constant && t == first;
    }
    const double value = sum / static_cast<double>(n);

    SplitChoice best;
    std::size_t best_slot = 0;
    const bool depth_ok = options_.max_depth < 0 || job.depth < options_.max_depth;
    if (depth_ok && !constant && n >= 2 * min_leaf) {
      std::span<const std::size_t> tried = slots;
      if (restrict) {
        candidates = slots;
        // Partial Fisher-Yates: first mtry entries are a uniform sample.
        for (std::size_t i = 0; i < options_.mtry; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
          std::swap(candidates[i], candidates[pick(*rng)]);
        }
        candidates.resize(options_.mtry);
        std::sort(candidates.begin(), candidates.end());
        tried = candidates;
      }
      for (auto k : tried) {
        const std::uint32_t* o = order.data() + k * m + job.begin;
        const double* v = values.data() + k * m;
        if (v[o[0]] == v[o[n - 1]]) continue;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += target[o[i]] - value;
        const double parent = total * total / static_cast<double>(n);
        double left = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          left += target[o[i]] - value;
          const std::size_t nl = i + 1;
          const double a = v[o[i]];
          const double b = v[o[i + 1]];
          if (a == b || nl < min_leaf || n - nl < min_leaf) continue;
          const double right = total - left;
          const double gain = left * left / static_cast<double>(nl) +
                              right * right / static_cast<double>(n - nl) - parent;
          if (gain > best.gain) {
            double mid = std::midpoint(a, b);
            if (!(mid < b)) mid = a;
            best = {static_cast<int>(features[k]), mid, gain};
            best_slot = k;
          }
        }
      }
    }

    auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
    node.value = value;
    if (best.feature < 0) {
      if (leaf_samples) {
        if (leaf_samples->size() <= static_cast<std::size_t>(job.node)) {
          leaf_samples->resize(static_cast<std::size_t>(job.node) + 1);
        }
        auto& out = (*leaf_samples)[static_cast<std::size_t>(job.node)];
        out.clear();
        for (std::size_t i = 0; i < n; ++i) out.push_back(samples[node_members[i]]);
      }
      continue;
    }

    const double* v = values.data() + best_slot * m;
    for (std::size_t i = 0; i < n; ++i) {
      const auto pos = node_members[i];
      goes_left[pos] = v[pos] <= best.threshold ? 1 : 0;
    }
    const std::size_t nl = stable_split(members.data() + job.begin, n);
    for (std::size_t k = 0; k < nf; ++k) stable_split(order.data() + k * m + job.begin, n);

    node.feature = best.feature;
    node.threshold = best.threshold;
    const int left = static_cast<int>(tree.nodes.size());
    const int right = left + 1;
    node.left = left;
    node.right = right;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    // Right pushed first so the left subtree is processed next.
    stack.push_back({right, job.begin + nl, job.end, job.depth + 1});
    stack.push_back({left, job.begin, job.begin + nl, job.depth + 1});
  }
  if (leaf_samples) leaf_samples->resize(tree.nodes.size());
  return tree;
}

RegressionTree fit_cart(const Matrix& x, std::span<const double> y, int max_depth,
                        std::size_t min_leaf) {
  if (x.rows() != y.size()) fail(Errc::shape, "X rows and y length differ");
  if (min_leaf < 1) fail(Errc::configuration, "min_leaf must be >= 1");
  std::vector<std::size_t> samples(x.rows());
  std::iota(samples.begin(), samples.end(), 0);
  std::vector<std::size_t> features(x.cols());
  std::iota(features.begin(), features.end(), 0);
  TreeBuilder builder(x, y, TreeOptions{max_depth, min_leaf, 0});
  return builder.build(samples, features);
}

}  // namespace socmap
