#include "socmap/learners/model_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "socmap/error.hpp"

namespace socmap {

using nlohmann::json;

namespace {

// --- spec ------------------------------------------------------------------

template <class P>
json params_to_json(const P& p);

template <>
json params_to_json(const SvrParams& p) {
  return {{"C", p.C}, {"sigma", p.sigma}, {"epsilon", p.epsilon}, {"scale_target", p.scale_target},
          {"kkt_tolerance", p.kkt_tolerance}, {"gap_tolerance", p.gap_tolerance},
          {"max_iterations", p.max_iterations}};
}
template <>
json params_to_json(const AnnParams& p) {
  return {{"size", p.size}, {"decay", p.decay}, {"epochs", p.epochs}, {"step", p.step},
          {"momentum", p.momentum}};
}
template <>
json params_to_json(const ModelTreeParams& p) {
  return {{"committees", p.committees}, {"neighbors", p.neighbors}, {"max_depth", p.max_depth},
          {"min_leaf", p.min_leaf}, {"ridge", p.ridge}};
}
template <>
json params_to_json(const RfParams& p) {
  json j = {{"ntree", p.ntree}, {"min_leaf", p.min_leaf}, {"bootstrap", p.bootstrap}};
  j["mtry"] = p.mtry ? json(*p.mtry) : json(nullptr);
  return j;
}
template <>
json params_to_json(const XgbParams& p) {
  return {{"max_depth", p.max_depth}, {"min_child_weight", p.min_child_weight},
          {"colsample_bytree", p.colsample_bytree}, {"subsample", p.subsample}, {"eta", p.eta},
          {"rounds", p.rounds}, {"early_stopping_rounds", p.early_stopping_rounds},
          {"holdout_fraction", p.holdout_fraction}};
}
template <>
json params_to_json(const DnnParams& p) {
  return {{"hidden", p.hidden}, {"size", p.size},
          {"init", p.init == WeightInit::uniform ? "uniform" : "he_normal"},
          {"learning_rate", p.learning_rate}, {"dropout", p.dropout}, {"epochs", p.epochs},
          {"batch_size", p.batch_size}, {"momentum", p.momentum}};
}
template <>
json params_to_json(const MeanParams&) {
  return json::object();
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      fail(Errc::spec, std::string("bad value for \"") + key + "\": " + e.what());
    }
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, Algorithm a) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) fail(Errc::spec, "unknown " + std::string(to_string(a)) + " parameter \"" + key + "\"");
  }
}

Hyperparameters params_from_json(Algorithm a, const json& j) {
  switch (a) {
    case Algorithm::SVR: {
      reject_unknown(j, {"C", "sigma", "epsilon", "scale_target", "kkt_tolerance", "gap_tolerance",
                         "max_iterations"}, a);
      SvrParams p;
      read(j, "C", p.C);
      read(j, "sigma", p.sigma);
      read(j, "epsilon", p.epsilon);
      read(j, "scale_target", p.scale_target);
      read(j, "kkt_tolerance", p.kkt_tolerance);
      read(j, "gap_tolerance", p.gap_tolerance);
      read(j, "max_iterations", p.max_iterations);
      return p;
    }
    case Algorithm::ANN: {
      reject_unknown(j, {"size", "decay", "epochs", "step", "momentum"}, a);
      AnnParams p;
      read(j, "size", p.size);
      read(j, "decay", p.decay);
      read(j, "epochs", p.epochs);
      read(j, "step", p.step);
      read(j, "momentum", p.momentum);
      return p;
    }
    case Algorithm::ModelTree: {
      reject_unknown(j, {"committees", "neighbors", "max_depth", "min_leaf", "ridge"}, a);
      ModelTreeParams p;
      read(j, "committees", p.committees);
      read(j, "neighbors", p.neighbors);
      read(j, "max_depth", p.max_depth);
      read(j, "min_leaf", p.min_leaf);
      read(j, "ridge", p.ridge);
      return p;
    }
    case Algorithm::RF: {
      reject_unknown(j, {"mtry", "ntree", "min_leaf", "bootstrap"}, a);
      RfParams p;
      if (auto it = j.find("mtry"); it != j.end() && !it->is_null()) p.mtry = it->get<int>();
      read(j, "ntree", p.ntree);
      read(j, "min_leaf", p.min_leaf);
      read(j, "bootstrap", p.bootstrap);
      return p;
    }
    case Algorithm::XGB: {
      reject_unknown(j, {"max_depth", "min_child_weight", "colsample_bytree", "subsample", "eta",
                         "rounds", "early_stopping_rounds", "holdout_fraction"}, a);
      XgbParams p;
      read(j, "max_depth", p.max_depth);
      read(j, "min_child_weight", p.min_child_weight);
      read(j, "colsample_bytree", p.colsample_bytree);
      read(j, "subsample", p.subsample);
      read(j, "eta", p.eta);
      read(j, "rounds", p.rounds);
      read(j, "early_stopping_rounds", p.early_stopping_rounds);
      read(j, "holdout_fraction", p.holdout_fraction);
      return p;
    }
    case Algorithm::DNN: {
      reject_unknown(j, {"hidden", "size", "init", "learning_rate", "dropout", "epochs", "batch_size",
                         "momentum"}, a);
      DnnParams p;
      read(j, "hidden", p.hidden);
      read(j, "size", p.size);
      std::string init = "he_normal";
      read(j, "init", init);
      if (init == "uniform") {
        p.init = WeightInit::uniform;
      } else if (init == "he_normal") {
        p.init = WeightInit::he_normal;
      } else {
        fail(Errc::spec, "DNN.init must be \"uniform\" or \"he_normal\", got \"" + init + "\"");
      }
      read(j, "learning_rate", p.learning_rate);
      read(j, "dropout", p.dropout);
      read(j, "epochs", p.epochs);
      read(j, "batch_size", p.batch_size);
      read(j, "momentum", p.momentum);
      return p;
    }
    case Algorithm::Mean:
      reject_unknown(j, {}, a);
      return MeanParams{};
  }
  fail(Errc::spec, "unhandled algorithm");
}

// --- fitted models ---------------------------------------------------------

json number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()},
          {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}
Matrix matrix_from(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

json scaler_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }
Standardizer scaler_from(const json& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
}

json tree_json(const RegressionTree& t) {
  std::vector<int> feature, left, right;
  std::vector<double> threshold, value;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    left.push_back(n.left);
    right.push_back(n.right);
    threshold.push_back(n.threshold);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
          {"value", value}};
}
RegressionTree tree_from(const json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  RegressionTree t;
  t.nodes.resize(feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) {
    t.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
  }
  return t;
}

json network_json(const NetworkModel& m) {
  json layers = json::array();
  for (const auto& l : m.net.layers()) {
    layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  }
  return {{"scaler", scaler_json(m.scaler)}, {"y_mean", m.y_mean}, {"y_scale", m.y_scale},
          {"activation", m.net.activation() == Activation::sigmoid ? "sigmoid" : "relu"},
          {"layers", layers}};
}
NetworkModel network_from(const json& j) {
  NetworkModel m;
  m.scaler = scaler_from(j.at("scaler"));
  m.y_mean = j.at("y_mean").get<double>();
  m.y_scale = j.at("y_scale").get<double>();
  const auto activation = j.at("activation").get<std::string>() == "sigmoid" ? Activation::sigmoid
                                                                              : Activation::relu;
  std::vector<std::size_t> widths;
  std::vector<double> theta;
  for (const auto& l : j.at("layers")) {
    if (widths.empty()) widths.push_back(l.at("in").get<std::size_t>());
    widths.push_back(l.at("out").get<std::size_t>());
    const auto w = l.at("weights").get<std::vector<double>>();
    const auto b = l.at("bias").get<std::vector<double>>();
    theta.insert(theta.end(), w.begin(), w.end());
    theta.insert(theta.end(), b.begin(), b.end());
  }
  m.net = FeedForwardNet(widths, activation);
  m.net.set_parameters(theta);
  return m;
}

json fitted_json(const FittedModel& fitted) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvrModel>) {
          return {{"scaler", scaler_json(m.scaler)}, {"y_mean", m.y_mean}, {"y_scale", m.y_scale},
                  {"sigma", m.sigma}, {"rho", m.rho}, {"support", matrix_json(m.support)},
                  {"coef", m.coef}, {"dual_gap", m.dual_gap}};
        } else if constexpr (std::is_same_v<T, MlpModel> || std::is_same_v<T, DnnModel>) {
          return network_json(m.network);
        } else if constexpr (std::is_same_v<T, ModelTreeModel>) {
          json members = json::array();
          for (const auto& mem : m.members) {
            json leaves = json::array();
            for (const auto& leaf : mem.leaves) {
              leaves.push_back({{"intercept", leaf.intercept}, {"coef", leaf.coef}});
            }
            members.push_back({{"skeleton", tree_json(mem.skeleton)}, {"leaves", leaves}});
          }
          return {{"scaler", scaler_json(m.scaler)}, {"members", members},
                  {"neighbors", m.neighbors}, {"train_x", matrix_json(m.train_x)},
                  {"train_y", m.train_y}, {"train_fit", m.train_fit}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_json(t));
          return {{"trees", trees}, {"oob_rmse", number(m.oob_rmse)}};
        } else if constexpr (std::is_same_v<T, BoostModel>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_json(t));
          return {{"base", m.base}, {"eta", m.eta}, {"trees", trees}};
        } else {
          return {{"value", m.value}};
        }
      },
      fitted);
}

FittedModel fitted_from(Algorithm a, const json& j) {
  switch (a) {
    case Algorithm::SVR: {
      SvrModel m;
      m.scaler = scaler_from(j.at("scaler"));
      m.y_mean = j.at("y_mean").get<double>();
      m.y_scale = j.at("y_scale").get<double>();
      m.sigma = j.at("sigma").get<double>();
      m.rho = j.at("rho").get<double>();
      m.support = matrix_from(j.at("support"));
      m.coef = j.at("coef").get<std::vector<double>>();
      m.dual_gap = j.at("dual_gap").get<double>();
      return m;
    }
    case Algorithm::ANN:
      return MlpModel{network_from(j)};
    case Algorithm::DNN:
      return DnnModel{network_from(j)};
    case Algorithm::ModelTree: {
      ModelTreeModel m;
      m.scaler = scaler_from(j.at("scaler"));
      for (const auto& mem : j.at("members")) {
        LinearLeafTree t;
        t.skeleton = tree_from(mem.at("skeleton"));
        for (const auto& leaf : mem.at("leaves")) {
          t.leaves.push_back({leaf.at("intercept").get<double>(),
                              leaf.at("coef").get<std::vector<double>>()});
        }
        m.members.push_back(std::move(t));
      }
      m.neighbors = j.at("neighbors").get<int>();
      m.train_x = matrix_from(j.at("train_x"));
      m.train_y = j.at("train_y").get<std::vector<double>>();
      m.train_fit = j.at("train_fit").get<std::vector<double>>();
      return m;
    }
    case Algorithm::RF: {
      ForestModel m;
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from(t));
      m.oob_rmse = number(j.at("oob_rmse"));
      return m;
    }
    case Algorithm::XGB: {
      BoostModel m;
      m.base = j.at("base").get<double>();
      m.eta = j.at("eta").get<double>();
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from(t));
      return m;
    }
    case Algorithm::Mean:
      return MeanModel{j.at("value").get<double>()};
  }
  fail(Errc::format, "unhandled algorithm");
}

}  // namespace

json spec_to_json(const LearnerSpec& spec) {
  return {{"algorithm", std::string(to_string(spec.algorithm()))},
          {"seed", spec.seed},
          {"params", std::visit([](const auto& p) { return params_to_json(p); }, spec.params)}};
}

LearnerSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("algorithm")) {
    fail(Errc::spec, "learner spec needs an \"algorithm\" field");
  }
  LearnerSpec spec;
  const auto a = algorithm_from_string(j.at("algorithm").get<std::string>());
  spec.params = params_from_json(a, j.value("params", json::object()));
  spec.seed = j.value("seed", std::uint64_t{0});
  return spec;
}

json model_to_json(const TrainedModel& model) {
  json curve = json::array();
  for (double v : model.summary().loss_curve) curve.push_back(number(v));
  return {{"format", "socmap.model"},
          {"version", kModelFormatVersion},
          {"spec", spec_to_json(model.spec())},
          {"feature_names", model.feature_names()},
          {"loss_curve", curve},
          {"fitted", fitted_json(model.fitted())}};
}

TrainedModel model_from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != "socmap.model") {
      fail(Errc::format, "not a socmap model document");
    }
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      fail(Errc::format, "unsupported model format version " + std::to_string(version));
    }
    auto spec = spec_from_json(j.at("spec"));
    TrainSummary summary;
    for (const auto& v : j.at("loss_curve")) summary.loss_curve.push_back(number(v));
    auto fitted = fitted_from(spec.algorithm(), j.at("fitted"));
    return TrainedModel(std::move(spec), j.at("feature_names").get<std::vector<std::string>>(),
                        std::move(fitted), std::move(summary));
  } catch (const json::exception& e) {
    fail(Errc::format, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  const auto bytes = json::to_cbor(model_to_json(model));
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io, "failed writing model file " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::from_cbor(bytes);
  } catch (const json::exception& e) {
    fail(Errc::format, "model file " + path.string() + " is not valid CBOR: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace socmap
