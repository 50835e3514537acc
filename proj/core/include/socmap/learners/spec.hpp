#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace socmap {

enum class Algorithm { SVR, ANN, ModelTree, RF, XGB, DNN, Mean };

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);

/// The six learners compared by the evaluate report. Mean is a baseline
/// reference and not part of this list.
inline constexpr Algorithm kStudyAlgorithms[] = {Algorithm::SVR, Algorithm::ANN, Algorithm::ModelTree,
                                                 Algorithm::RF,  Algorithm::XGB, Algorithm::DNN};

enum class WeightInit { uniform, he_normal };

// Hyperparameters bounded by the default search ranges are visited by
// for_each_param(); the remaining fields are solver settings.

struct SvrParams {
  double C = 1.0;
  double sigma = 1.0;
  double epsilon = 0.1;
  bool scale_target = true;
  double kkt_tolerance = 1e-3;
  double gap_tolerance = 1e-3;
  long max_iterations = 10'000'000;

  bool operator==(const SvrParams&) const = default;
};

struct AnnParams {
  int size = 5;
  double decay = 0.01;
  int epochs = 2000;
  double step = 0.1;
  double momentum = 0.9;

  bool operator==(const AnnParams&) const = default;
};

struct ModelTreeParams {
  int committees = 1;
  int neighbors = 0;
  int max_depth = 4;
  int min_leaf = 30;
  double ridge = 0.1;

  bool operator==(const ModelTreeParams&) const = default;
};

struct RfParams {
  std::optional<int> mtry;  // unset: ceil(sqrt(p))
  int ntree = 500;
  int min_leaf = 5;
  bool bootstrap = true;

  bool operator==(const RfParams&) const = default;
};

struct XgbParams {
  int max_depth = 6;
  double min_child_weight = 1.0;
  double colsample_bytree = 1.0;
  double subsample = 1.0;
  double eta = 0.3;
  int rounds = 500;
  int early_stopping_rounds = 25;  // 0 disables the internal holdout
  double holdout_fraction = 0.1;

  bool operator==(const XgbParams&) const = default;
};

struct DnnParams {
  int hidden = 2;
  int size = 32;
  WeightInit init = WeightInit::he_normal;
  double learning_rate = 0.01;
  double dropout = 0.2;
  int epochs = 100;
  int batch_size = 32;
  double momentum = 0.9;

  bool operator==(const DnnParams&) const = default;
};

struct MeanParams {
  bool operator==(const MeanParams&) const = default;
};

using Hyperparameters =
    std::variant<SvrParams, AnnParams, ModelTreeParams, RfParams, XgbParams, DnnParams, MeanParams>;

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
  bool integer = false;
};

/// Calls f(name, value&, range) for every range-bounded hyperparameter.
template <class F>
void for_each_param(SvrParams& p, F&& f) {
  f("C", p.C, ParamRange{0.01, 100.0, true, false});
  f("sigma", p.sigma, ParamRange{0.01, 100.0, true, false});
}
template <class F>
void for_each_param(AnnParams& p, F&& f) {
  f("size", p.size, ParamRange{1, 10, false, true});
  f("decay", p.decay, ParamRange{0.001, 0.05, true, false});
}
template <class F>
void for_each_param(ModelTreeParams& p, F&& f) {
  f("committees", p.committees, ParamRange{1, 100, false, true});
  f("neighbors", p.neighbors, ParamRange{0, 9, false, true});
}
template <class F>
void for_each_param(RfParams& p, F&& f) {
  if (p.mtry) f("mtry", *p.mtry, ParamRange{1, 30, false, true});
  f("ntree", p.ntree, ParamRange{100, 3000, false, true});
}
template <class F>
void for_each_param(XgbParams& p, F&& f) {
  f("max_depth", p.max_depth, ParamRange{3, 10, false, true});
  f("min_child_weight", p.min_child_weight, ParamRange{0.0, 5.0, false, false});
  f("colsample_bytree", p.colsample_bytree, ParamRange{0.5, 1.0, false, false});
  f("subsample", p.subsample, ParamRange{0.5, 1.0, false, false});
  f("eta", p.eta, ParamRange{0.01, 0.5, true, false});
}
template <class F>
void for_each_param(DnnParams& p, F&& f) {
  f("hidden", p.hidden, ParamRange{2, 10, false, true});
  f("size", p.size, ParamRange{15, 200, false, true});
  f("learning_rate", p.learning_rate, ParamRange{0.001, 0.05, true, false});
  f("dropout", p.dropout, ParamRange{0.2, 0.8, false, false});
}
template <class F>
void for_each_param(MeanParams&, F&&) {}

struct LearnerSpec {
  Hyperparameters params = RfParams{};
  std::uint64_t seed = 0;

  Algorithm algorithm() const;

  bool operator==(const LearnerSpec&) const;
};

LearnerSpec default_spec(Algorithm algorithm, std::uint64_t seed = 0);

/// Throws Errc::spec naming the parameter and its allowed range when a
/// bounded hyperparameter is outside it, or a solver setting is unusable.
void validate(const LearnerSpec& spec);

/// A search space: per-parameter ranges, defaulting to the built-in ranges.
/// Unlisted fields take their values from `base`.
struct SpecSpace {
  LearnerSpec base;
  std::vector<std::pair<std::string, ParamRange>> overrides;

  static SpecSpace defaults(Algorithm algorithm);
};

}  // namespace socmap
