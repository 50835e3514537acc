#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "socmap/learners/model.hpp"
#include "socmap/learners/spec.hpp"
#include "socmap/mask.hpp"
#include "socmap/metrics.hpp"
#include "socmap/samples.hpp"

namespace socmap {

enum class TuneMode {
  none,
  nested,  // random search inside each training fold
  global,  // one search on all rows, then plain CV with the winner
};

struct CvOptions {
  TuneMode tune = TuneMode::none;
  std::size_t tune_budget = 20;
  std::size_t inner_folds = 5;
  int threads = 0;
};

/// One k-fold run. Predictions are kept on the table's (possibly transformed)
/// target scale; metrics are on the original scale.
struct CvRun {
  LearnerSpec spec;
  FoldAssignment folds;
  std::vector<std::string> features;
  TargetTransform transform;
  std::vector<std::string> ids;
  std::vector<double> observed;     // original scale
  std::vector<TrainedModel> fold_models;
  std::vector<double> predictions;  // out-of-fold, model scale
  FoldedMetrics metrics;

  /// Out-of-fold predictions on the original scale.
  std::vector<double> back_transformed() const;
};

CvRun cross_validate(const SampleTable& table, const FeatureMask& mask, const LearnerSpec& spec,
                     const FoldAssignment& folds, const CvOptions& options = {});

struct Comparison {
  std::vector<CvRun> runs;
  std::size_t best = 0;
};

/// Lowest mean RMSE wins; ties go to the higher mean CCC, then to the earlier
/// entry.
std::size_t pick_best(std::span<const FoldedMetrics> rows);

Comparison compare(const SampleTable& table, const FeatureMask& mask,
                   std::span<const LearnerSpec> specs, const FoldAssignment& folds,
                   const CvOptions& options = {});

nlohmann::json metrics_to_json(const MetricsReport& m);
nlohmann::json folded_to_json(const FoldedMetrics& m);
FoldedMetrics folded_from_json(const nlohmann::json& j);
nlohmann::json folds_to_json(const FoldAssignment& folds);
FoldAssignment folds_from_json(const nlohmann::json& j);

/// Writes folds.json, model_fold_{i}.bin, oof_predictions.csv, metrics.json.
void save_cv_run(const CvRun& run, const std::filesystem::path& dir);
CvRun load_cv_run(const std::filesystem::path& dir);

}  // namespace socmap
