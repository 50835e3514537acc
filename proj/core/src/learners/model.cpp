#include "socmap/learners/model.hpp"

#include <chrono>
#include <cmath>

#include "socmap/error.hpp"

namespace socmap {

TrainedModel::TrainedModel(LearnerSpec spec, std::vector<std::string> feature_names,
                           FittedModel fitted, TrainSummary summary)
    : spec_(std::move(spec)),
      feature_names_(std::move(feature_names)),
      fitted_(std::move(fitted)),
      summary_(std::move(summary)) {
  if (fitted_.index() != spec_.params.index()) {
    fail(Errc::state, "fitted model does not match the learner spec");
  }
}

double TrainedModel::predict_row(std::span<const double> x) const {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MlpModel> || std::is_same_v<T, DnnModel>) {
          return m.network.predict(x);
        } else if constexpr (std::is_same_v<T, MeanModel>) {
          return m.value;
        } else {
          return m.predict(x);
        }
      },
      fitted_);
}

TrainedModel fit(const LearnerSpec& spec, const Matrix& x, std::span<const double> y,
                 std::vector<std::string> feature_names) {
  validate(spec);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n != y.size()) {
    fail(Errc::shape, "X has " + std::to_string(n) + " rows but y has " + std::to_string(y.size()));
  }
  if (n < 5) fail(Errc::insufficient_data, "fit needs at least 5 samples, got " + std::to_string(n));
  if (p < 1) fail(Errc::insufficient_data, "fit needs at least one feature");
  for (double v : x.data()) {
    if (!std::isfinite(v)) fail(Errc::data, "non-finite value in feature matrix");
  }
  for (double v : y) {
    if (!std::isfinite(v)) fail(Errc::data, "non-finite value in target");
  }
  if (feature_names.empty()) {
    for (std::size_t c = 0; c < p; ++c) feature_names.push_back("x" + std::to_string(c));
  }
  if (feature_names.size() != p) fail(Errc::shape, "feature name count does not match X width");
  if (const auto* rf = std::get_if<RfParams>(&spec.params); rf && rf->mtry &&
                                                             static_cast<std::size_t>(*rf->mtry) > p) {
    fail(Errc::spec, "RF.mtry=" + std::to_string(*rf->mtry) + " exceeds the " + std::to_string(p) +
                         " available features");
  }

  const auto start = std::chrono::steady_clock::now();
  TrainSummary summary;
  FittedModel fitted = std::visit(
      [&](const auto& params) -> FittedModel {
        using P = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<P, SvrParams>) {
          auto m = fit_svr(x, y, params);
          summary.loss_curve = {m.dual_gap};
          return m;
        } else if constexpr (std::is_same_v<P, AnnParams>) {
          auto f = fit_mlp(x, y, params, spec.seed);
          summary.loss_curve = std::move(f.loss_curve);
          return MlpModel{std::move(f.model)};
        } else if constexpr (std::is_same_v<P, ModelTreeParams>) {
          return fit_model_tree(x, y, params, spec.seed);
        } else if constexpr (std::is_same_v<P, RfParams>) {
          auto m = fit_random_forest(x, y, params, spec.seed);
          summary.loss_curve = {m.oob_rmse};
          return m;
        } else if constexpr (std::is_same_v<P, XgbParams>) {
          auto f = fit_xgb(x, y, params, spec.seed);
          summary.loss_curve = std::move(f.train_rmse);
          return std::move(f.model);
        } else if constexpr (std::is_same_v<P, DnnParams>) {
          auto f = fit_dnn(x, y, params, spec.seed);
          summary.loss_curve = std::move(f.loss_curve);
          return DnnModel{std::move(f.model)};
        } else {
          double s = 0.0;
          for (double v : y) s += v;
          return MeanModel{s / static_cast<double>(n)};
        }
      },
      spec.params);
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return TrainedModel(spec, std::move(feature_names), std::move(fitted), std::move(summary));
}

std::vector<double> predict(const TrainedModel& model, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != model.width()) {
    fail(Errc::shape, "model expects " + std::to_string(model.width()) + " features, got " +
                          std::to_string(x.cols()));
  }
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = model.predict_row(x.row(r));
  return out;
}

std::vector<double> predict(const TrainedModel& model, const Matrix& x,
                            std::span<const std::string> columns) {
  const auto& names = model.feature_names();
  if (columns.size() != names.size()) {
    fail(Errc::shape, "model expects " + std::to_string(names.size()) + " named features, got " +
                          std::to_string(columns.size()));
  }
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (columns[c] != names[c]) {
      fail(Errc::shape, "feature " + std::to_string(c) + " is \"" + columns[c] +
                            "\" but the model was trained with \"" + names[c] + "\"");
    }
  }
  return predict(model, x);
}

}  // namespace socmap
