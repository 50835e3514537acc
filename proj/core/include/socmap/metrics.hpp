#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace socmap {

double mae(std::span<const double> observed, std::span<const double> predicted);
double rmse(std::span<const double> observed, std::span<const double> predicted);

/// 1 - SS_res / SS_tot. Throws Errc::degenerate when the observations have no
/// variance.
double r2(std::span<const double> observed, std::span<const double> predicted);

/// Lin's concordance correlation with population (1/n) moments. If both series
/// are constant and equal the result is 1; any other zero-variance case gives 0.
double ccc(std::span<const double> observed, std::span<const double> predicted);

struct MetricsReport {
  double mae = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
  double ccc = 0.0;
  std::size_t n = 0;
};

MetricsReport evaluate(std::span<const double> observed, std::span<const double> predicted);

struct FoldedMetrics {
  std::vector<MetricsReport> per_fold;
  MetricsReport mean;
  MetricsReport sd;
};

/// Per-metric mean and sample SD over the fold reports. The aggregated `n` is
/// the total sample count.
FoldedMetrics aggregate_folds(std::span<const MetricsReport> reports);

}  // namespace socmap
