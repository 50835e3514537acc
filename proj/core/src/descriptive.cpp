#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "socmap/error.hpp"
#include "socmap/samples.hpp"

namespace socmap {

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Small-lambda form of the CDF converges faster there.
    const double pi = std::numbers::pi;
    const double factor = std::sqrt(2.0 * pi) / lambda;
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::exp(-std::pow(2.0 * k - 1.0, 2) * pi * pi / (8.0 * lambda * lambda));
      cdf += term;
      if (term < 1e-17) break;
    }
    return std::clamp(1.0 - factor * cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::span<const double> values, double mean, double sd) {
  if (values.empty()) fail(Errc::insufficient_data, "KS test needs at least one value");
  if (!(sd > 0.0)) fail(Errc::degenerate, "KS reference distribution needs sd > 0");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-(sorted[i] - mean) / (sd * std::numbers::sqrt2));
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

DescriptiveStats describe(std::span<const double> values) {
  const std::size_t count = values.size();
  if (count < 3) {
    fail(Errc::insufficient_data, "descriptive statistics need n >= 3, got " + std::to_string(count));
  }
  // Sorting first makes every statistic independent of input order.
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(count);

  DescriptiveStats s;
  s.n = count;
  s.min = v.front();
  s.max = v.back();
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  s.sd = std::sqrt(m2 / (n - 1.0));
  s.cv = s.mean != 0.0 ? 100.0 * s.sd / s.mean : 0.0;

  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 0.0) {
    const double g1 = m3 / std::pow(m2, 1.5);
    s.skewness = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
    const double g2 = m4 / (m2 * m2) - 3.0;
    s.kurtosis = count >= 4 ? ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0)) : g2;
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - s.mean) / s.sd;
    s.ks_p = ks_test_normal(z).p_value;
  } else {
    s.skewness = 0.0;
    s.kurtosis = 0.0;
    s.ks_p = 0.0;
  }
  return s;
}

DescriptiveStats describe(const SampleTable& table) {
  const auto t = table.targets();
  return describe(std::span<const double>(t));
}

}  // namespace socmap
