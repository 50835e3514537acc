#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "socmap/crossval.hpp"
#include "socmap/matrix.hpp"
#include "socmap/raster/grid.hpp"
#include "socmap/samples.hpp"

namespace socmap {

struct IntervalOptions {
  double z = 1.64;
  double ci_level = 0.90;  // reported only; z defines the interval
  bool floor_zero = true;  // clamp the lower bound at 0 when the mean is non-negative
  int threads = 0;
};

struct PredictionBundle {
  RasterGrid mean;
  RasterGrid sd;
  RasterGrid lower;
  RasterGrid upper;
  double ci_level = 0.90;
  double z = 1.64;
};

/// Interval from k realizations: mean, sample SD, mean -/+ z * SD.
struct Interval {
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};
Interval ensemble_interval(std::span<const double> values, const IntervalOptions& options);

/// Every fold model predicts every pixel; predictions are back-transformed
/// before the ensemble statistics. Layers are looked up by run.features.
PredictionBundle predict_map(const CvRun& run, const RasterStack& stack,
                             const IntervalOptions& options = {});

void write_bundle(const PredictionBundle& bundle, const std::filesystem::path& dir);

struct CoverageReport {
  std::size_t n_total = 0;
  std::size_t n_inside = 0;
  std::size_t n_below = 0;
  std::size_t n_above = 0;
  double pct_inside = 0.0;
  double pct_below = 0.0;
  double pct_above = 0.0;
};

/// `realizations` is n x k on the original scale. Interval bounds follow
/// ensemble_interval, so the zero floor applies as in the maps.
CoverageReport coverage(const Matrix& realizations, std::span<const double> observed,
                        const IntervalOptions& options = {});

/// Per-sample fold-model predictions (n x k, original scale). With
/// `exclude_own_fold` the sample's own validation-fold model is left out.
Matrix fold_realizations(const CvRun& run, const SampleTable& table, bool exclude_own_fold = false);

CoverageReport coverage(const CvRun& run, const SampleTable& table, const IntervalOptions& options = {},
                        bool exclude_own_fold = false);

nlohmann::json coverage_to_json(const CoverageReport& report);

/// Two-sided Welch t-test p-value. Two constant samples give 1 when their
/// means are equal and 0 otherwise.
double welch_p_value(std::span<const double> a, std::span<const double> b);

struct StratumRow {
  std::string label;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double cv = 0.0;  // percent
  std::string letters;
};

struct StratifiedSummary {
  double alpha = 0.05;
  std::vector<StratumRow> rows;  // by descending mean
  std::vector<std::vector<double>> p_values;  // pairwise, row order
  std::vector<std::string> warnings;
};

/// Group means with a compact letter display: each letter is a maximal set
/// of classes with no significant pairwise difference, so two classes share
/// a letter exactly when their Welch test has p >= alpha.
StratifiedSummary stratify(std::span<const double> values, std::span<const std::string> labels,
                           double alpha = 0.05);
StratifiedSummary stratify(const RasterGrid& values, const RasterGrid& classes, double alpha = 0.05);

void write_stratified_csv(const StratifiedSummary& summary, const std::filesystem::path& path);

}  // namespace socmap
