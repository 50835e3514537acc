#include "socmap/mapping.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "socmap/error.hpp"
#include "socmap/parallel.hpp"

namespace socmap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

std::string letter_name(std::size_t i) {
  std::string s;
  ++i;
  while (i > 0) {
    --i;
    s.insert(s.begin(), static_cast<char>('A' + i % 26));
    i /= 26;
  }
  return s;
}

std::string format_label(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  return format_label(v);
}

// Bron-Kerbosch with pivoting over a small adjacency matrix.
void maximal_cliques(const std::vector<std::vector<bool>>& adj, std::vector<std::size_t> r,
                     std::vector<std::size_t> p, std::vector<std::size_t> x,
                     std::vector<std::vector<std::size_t>>& out) {
  if (p.empty() && x.empty()) {
    std::sort(r.begin(), r.end());
    out.push_back(std::move(r));
    return;
  }
  std::size_t pivot = p.empty() ? x.front() : p.front();
  std::size_t best = 0;
  for (const auto* set : {&p, &x}) {
    for (auto u : *set) {
      std::size_t deg = 0;
      for (auto v : p) deg += adj[u][v] ? 1 : 0;
      if (deg > best) {
        best = deg;
        pivot = u;
      }
    }
  }
  const auto candidates = p;
  for (auto v : candidates) {
    if (adj[pivot][v]) continue;
    std::vector<std::size_t> r2 = r, p2, x2;
    r2.push_back(v);
    for (auto u : p) {
      if (adj[v][u]) p2.push_back(u);
    }
    for (auto u : x) {
      if (adj[v][u]) x2.push_back(u);
    }
    maximal_cliques(adj, std::move(r2), std::move(p2), std::move(x2), out);
    p.erase(std::find(p.begin(), p.end(), v));
    x.push_back(v);
  }
}

}  // namespace

Interval ensemble_interval(std::span<const double> values, const IntervalOptions& options) {
  if (values.size() < 2) fail(Errc::insufficient_data, "an interval needs at least two realizations");
  Interval iv;
  iv.mean = mean_of(values);
  iv.sd = std::sqrt(sample_var(values, iv.mean));
  iv.lower = iv.mean - options.z * iv.sd;
  iv.upper = iv.mean + options.z * iv.sd;
  if (options.floor_zero && iv.lower < 0.0 && iv.mean >= 0.0) iv.lower = 0.0;
  return iv;
}

PredictionBundle predict_map(const CvRun& run, const RasterStack& stack,
                             const IntervalOptions& options) {
  const std::size_t k = run.fold_models.size();
  if (k < 2) fail(Errc::insufficient_data, "uncertainty maps need at least two fold models");
  std::vector<const RasterGrid*> layers;
  for (const auto& name : run.features) {
    const auto* g = stack.find(name);
    if (!g) fail(Errc::dependency, "stack has no layer for model feature \"" + name + "\"");
    layers.push_back(g);
  }
  const auto& def = stack.def();
  for (const auto& [name, grid] : stack.layers()) {
    if (!grid.def().aligned_with(def)) fail(Errc::alignment, "layer \"" + name + "\" is off-grid");
  }

  PredictionBundle b{RasterGrid(def, kNodata), RasterGrid(def, kNodata), RasterGrid(def, kNodata),
                     RasterGrid(def, kNodata), options.ci_level, options.z};
  parallel_for(
      def.nrows,
      [&](std::size_t r) {
        std::vector<double> x(layers.size());
        std::vector<double> v(k);
        for (std::size_t c = 0; c < def.ncols; ++c) {
          bool valid = true;
          for (std::size_t l = 0; l < layers.size(); ++l) {
            x[l] = (*layers[l])(r, c);
            valid = valid && !std::isnan(x[l]);
          }
          if (!valid) continue;
          for (std::size_t f = 0; f < k; ++f) {
            v[f] = run.transform.backward(run.fold_models[f].predict_row(x));
          }
          const auto iv = ensemble_interval(v, options);
          b.mean(r, c) = iv.mean;
          b.sd(r, c) = iv.sd;
          b.lower(r, c) = iv.lower;
          b.upper(r, c) = iv.upper;
        }
      },
      options.threads);
  return b;
}

void write_bundle(const PredictionBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  write_ascii_grid(bundle.mean, dir / "mean.asc");
  write_ascii_grid(bundle.sd, dir / "sd.asc");
  write_ascii_grid(bundle.lower, dir / "lower.asc");
  write_ascii_grid(bundle.upper, dir / "upper.asc");
}

CoverageReport coverage(const Matrix& realizations, std::span<const double> observed,
                        const IntervalOptions& options) {
  if (realizations.rows() != observed.size()) fail(Errc::shape, "one row of realizations per observation");
  if (realizations.cols() < 2) fail(Errc::insufficient_data, "coverage needs k >= 2 realizations");
  CoverageReport rep;
  rep.n_total = observed.size();
  std::vector<double> row;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    row.clear();
    for (double v : realizations.row(i)) {
      if (!std::isnan(v)) row.push_back(v);
    }
    const auto iv = ensemble_interval(row, options);
    if (observed[i] < iv.lower) {
      ++rep.n_below;
    } else if (observed[i] > iv.upper) {
      ++rep.n_above;
    } else {
      ++rep.n_inside;
    }
  }
  if (rep.n_total > 0) {
    const double n = static_cast<double>(rep.n_total);
    rep.pct_inside = 100.0 * static_cast<double>(rep.n_inside) / n;
    rep.pct_below = 100.0 * static_cast<double>(rep.n_below) / n;
    rep.pct_above = 100.0 * static_cast<double>(rep.n_above) / n;
  }
  return rep;
}

Matrix fold_realizations(const CvRun& run, const SampleTable& table, bool exclude_own_fold) {
  const std::size_t k = run.fold_models.size();
  if (k < 2) fail(Errc::insufficient_data, "coverage needs at least two fold models");
  if (exclude_own_fold && k < 3) {
    fail(Errc::insufficient_data, "excluding the own fold needs at least three fold models");
  }
  if (exclude_own_fold && run.folds.fold_of.size() != table.size()) {
    fail(Errc::shape, "fold assignment does not match the sample table");
  }
  std::vector<std::size_t> cols;
  for (const auto& name : run.features) {
    auto idx = table.feature_index(name);
    if (!idx) fail(Errc::schema, "sample table lacks model feature \"" + name + "\"");
    cols.push_back(*idx);
  }
  const Matrix x = table.features(cols);
  Matrix out(table.size(), k);
  parallel_for(k, [&](std::size_t f) {
    const auto p = predict(run.fold_models[f], x);
    for (std::size_t i = 0; i < p.size(); ++i) {
      out(i, f) = exclude_own_fold && run.folds.fold_of[i] == f ? kNaN : run.transform.backward(p[i]);
    }
  });
  return out;
}

CoverageReport coverage(const CvRun& run, const SampleTable& table, const IntervalOptions& options,
                        bool exclude_own_fold) {
  std::vector<double> observed;
  for (const auto& r : table.rows()) observed.push_back(table.transform().backward(r.target));
  return coverage(fold_realizations(run, table, exclude_own_fold), observed, options);
}

nlohmann::json coverage_to_json(const CoverageReport& r) {
  return {{"n_total", r.n_total},       {"n_inside", r.n_inside},     {"n_below", r.n_below},
          {"n_above", r.n_above},       {"pct_inside", r.pct_inside}, {"pct_below", r.pct_below},
          {"pct_above", r.pct_above}};
}

double welch_p_value(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) fail(Errc::insufficient_data, "Welch test needs two observations per group");
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_var(a, ma) / static_cast<double>(a.size());
  const double vb = sample_var(b, mb) / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (se2 == 0.0) return ma == mb ? 1.0 : 0.0;
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 /
                    (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

StratifiedSummary stratify(std::span<const double> values, std::span<const std::string> labels,
                           double alpha) {
  if (values.size() != labels.size()) fail(Errc::shape, "values and class labels differ in length");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(Errc::configuration, "alpha must be in (0, 1)");
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isnan(values[i])) groups[labels[i]].push_back(values[i]);
  }

  StratifiedSummary out;
  out.alpha = alpha;
  std::vector<std::vector<double>> data;
  for (auto& [label, v] : groups) {
    if (v.size() < 2) {
      out.warnings.push_back("class \"" + label + "\" dropped: " + std::to_string(v.size()) +
                             " observation(s), need at least 2");
      continue;
    }
    StratumRow row;
    row.label = label;
    row.n = v.size();
    row.mean = mean_of(v);
    row.sd = std::sqrt(sample_var(v, row.mean));
    row.cv = row.mean != 0.0 ? 100.0 * row.sd / std::abs(row.mean) : kNaN;
    out.rows.push_back(row);
    data.push_back(std::move(v));
  }

  std::vector<std::size_t> order(out.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.rows[a].mean > out.rows[b].mean; });
  {
    std::vector<StratumRow> rows;
    std::vector<std::vector<double>> sorted;
    for (auto i : order) {
      rows.push_back(out.rows[i]);
      sorted.push_back(std::move(data[i]));
    }
    out.rows = std::move(rows);
    data = std::move(sorted);
  }

  const std::size_t m = out.rows.size();
  out.p_values.assign(m, std::vector<double>(m, 1.0));
  std::vector<std::vector<bool>> similar(m, std::vector<bool>(m, false));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double p = welch_p_value(data[i], data[j]);
      out.p_values[i][j] = out.p_values[j][i] = p;
      similar[i][j] = similar[j][i] = p >= alpha;
    }
  }

  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<std::size_t>> cliques;
  if (m > 0) maximal_cliques(similar, {}, all, {}, cliques);
  // Letters follow the mean ordering: 'A' holds the highest-mean class.
  std::sort(cliques.begin(), cliques.end());
  for (std::size_t l = 0; l < cliques.size(); ++l) {
    for (auto i : cliques[l]) out.rows[i].letters += letter_name(l);
  }
  return out;
}

StratifiedSummary stratify(const RasterGrid& values, const RasterGrid& classes, double alpha) {
  if (!values.def().aligned_with(classes.def())) fail(Errc::alignment, "value and class grids are not aligned");
  std::vector<double> v;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < values.values().size(); ++i) {
    const double x = values.values()[i];
    const double c = classes.values()[i];
    if (std::isnan(x) || std::isnan(c)) continue;
    v.push_back(x);
    labels.push_back(format_label(c));
  }
  return stratify(v, labels, alpha);
}

void write_stratified_csv(const StratifiedSummary& summary, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out << "class,n,mean,cv,letters\n";
  for (const auto& r : summary.rows) {
    out << r.label << ',' << r.n << ',' << format_number(r.mean) << ',' << format_number(r.cv) << ','
        << r.letters << '\n';
  }
  if (!out) fail(Errc::io, "failed writing " + path.string());
}

}  // namespace socmap
