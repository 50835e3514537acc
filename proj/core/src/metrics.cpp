#include "socmap/metrics.hpp"

#include <cmath>
#include <string>

#include "socmap/error.hpp"

namespace socmap {

namespace {

void check_pair(std::span<const double> o, std::span<const double> p, std::size_t min_n = 1) {
  if (o.size() != p.size()) {
    fail(Errc::shape, "observed has " + std::to_string(o.size()) + " values, predicted " +
                          std::to_string(p.size()));
  }
  if (o.size() < min_n) {
    fail(Errc::shape, "metric needs at least " + std::to_string(min_n) + " values");
  }
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (!std::isfinite(o[i]) || !std::isfinite(p[i])) {
      fail(Errc::data, "non-finite value at index " + std::to_string(i));
    }
  }
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double mae(std::span<const double> observed, std::span<const double> predicted) {
  check_pair(observed, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) s += std::abs(predicted[i] - observed[i]);
  return s / static_cast<double>(observed.size());
}

double rmse(std::span<const double> observed, std::span<const double> predicted) {
  check_pair(observed, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = predicted[i] - observed[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(observed.size()));
}

double r2(std::span<const double> observed, std::span<const double> predicted) {
  check_pair(observed, predicted, 2);
  const double mo = mean_of(observed);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
    ss_tot += (observed[i] - mo) * (observed[i] - mo);
  }
  if (ss_tot == 0.0) fail(Errc::degenerate, "R2 undefined: observed values have zero variance");
  return 1.0 - ss_res / ss_tot;
}

double ccc(std::span<const double> observed, std::span<const double> predicted) {
  check_pair(observed, predicted, 2);
  const double n = static_cast<double>(observed.size());
  const double mo = mean_of(observed);
  const double mp = mean_of(predicted);
  double vo = 0.0, vp = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double a = observed[i] - mo;
    const double b = predicted[i] - mp;
    vo += a * a;
    vp += b * b;
    cov += a * b;
  }
  vo /= n;
  vp /= n;
  cov /= n;
  if (vo == 0.0 || vp == 0.0) {
    bool equal = vo == 0.0 && vp == 0.0;
    for (std::size_t i = 0; equal && i < observed.size(); ++i) equal = observed[i] == predicted[i];
    return equal ? 1.0 : 0.0;
  }
  // 2 r so sp reduces to 2 cov
  return 2.0 * cov / (vo + vp + (mo - mp) * (mo - mp));
}

MetricsReport evaluate(std::span<const double> observed, std::span<const double> predicted) {
  MetricsReport r;
  r.mae = mae(observed, predicted);
  r.rmse = rmse(observed, predicted);
  r.r2 = r2(observed, predicted);
  r.ccc = ccc(observed, predicted);
  r.n = observed.size();
  return r;
}

FoldedMetrics aggregate_folds(std::span<const MetricsReport> reports) {
  if (reports.size() < 2) {
    fail(Errc::insufficient_data, "fold aggregation needs at least 2 reports, got " +
                                      std::to_string(reports.size()));
  }
  FoldedMetrics out;
  out.per_fold.assign(reports.begin(), reports.end());
  const double k = static_cast<double>(reports.size());

  auto summarize = [&](double MetricsReport::*field, double& mean, double& sd) {
    double s = 0.0;
    for (const auto& r : reports) s += r.*field;
    mean = s / k;
    double ss = 0.0;
    for (const auto& r : reports) ss += (r.*field - mean) * (r.*field - mean);
    sd = std::sqrt(ss / (k - 1.0));
  };
  summarize(&MetricsReport::mae, out.mean.mae, out.sd.mae);
  summarize(&MetricsReport::rmse, out.mean.rmse, out.sd.rmse);
  summarize(&MetricsReport::r2, out.mean.r2, out.sd.r2);
  summarize(&MetricsReport::ccc, out.mean.ccc, out.sd.ccc);
  std::size_t total = 0;
  for (const auto& r : reports) total += r.n;
  out.mean.n = total;
  out.sd.n = 0;
  return out;
}

}  // namespace socmap
