#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "socmap/learners/ensemble.hpp"
#include "socmap/learners/model_tree.hpp"
#include "socmap/learners/network.hpp"
#include "socmap/learners/spec.hpp"
#include "socmap/learners/svr.hpp"
#include "socmap/matrix.hpp"

namespace socmap {

struct MlpModel {
  NetworkModel network;
  bool operator==(const MlpModel&) const = default;
};

struct DnnModel {
  NetworkModel network;
  bool operator==(const DnnModel&) const = default;
};

struct MeanModel {
  double value = 0.0;
  bool operator==(const MeanModel&) const = default;
};

/// Alternative order matches Algorithm.
using FittedModel =
    std::variant<SvrModel, MlpModel, ModelTreeModel, ForestModel, BoostModel, DnnModel, MeanModel>;

struct TrainSummary {
  std::vector<double> loss_curve;
  double seconds = 0.0;  // wall time; not persisted
};

/// A fitted, immutable predictor bound to the named input columns it was
/// trained on.
class TrainedModel {
 public:
  TrainedModel(LearnerSpec spec, std::vector<std::string> feature_names, FittedModel fitted,
               TrainSummary summary);

  const LearnerSpec& spec() const noexcept { return spec_; }
  Algorithm algorithm() const noexcept { return spec_.algorithm(); }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  std::size_t width() const noexcept { return feature_names_.size(); }
  const FittedModel& fitted() const noexcept { return fitted_; }
  const TrainSummary& summary() const noexcept { return summary_; }

  double predict_row(std::span<const double> x) const;

 private:
  LearnerSpec spec_;
  std::vector<std::string> feature_names_;
  FittedModel fitted_;
  TrainSummary summary_;
};

/// Validates the spec against its ranges, checks n >= 5 and finite inputs,
/// then dispatches to the per-algorithm fit. Empty `feature_names` become
/// x0, x1, ...
TrainedModel fit(const LearnerSpec& spec, const Matrix& x, std::span<const double> y,
                 std::vector<std::string> feature_names = {});

std::vector<double> predict(const TrainedModel& model, const Matrix& x);

/// Like predict(), but also requires `columns` to name the model's features
/// in training order.
std::vector<double> predict(const TrainedModel& model, const Matrix& x,
                            std::span<const std::string> columns);

}  // namespace socmap
