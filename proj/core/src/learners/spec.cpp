#include "socmap/learners/spec.hpp"

#include <cmath>
#include <sstream>

#include "socmap/error.hpp"

namespace socmap {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::SVR: return "SVR";
    case Algorithm::ANN: return "ANN";
    case Algorithm::ModelTree: return "ModelTree";
    case Algorithm::RF: return "RF";
    case Algorithm::XGB: return "XGB";
    case Algorithm::DNN: return "DNN";
    case Algorithm::Mean: return "Mean";
  }
  return "?";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (auto a : {Algorithm::SVR, Algorithm::ANN, Algorithm::ModelTree, Algorithm::RF, Algorithm::XGB,
                 Algorithm::DNN, Algorithm::Mean}) {
    if (name == to_string(a)) return a;
  }
  if (name == "SVM") return Algorithm::SVR;
  if (name == "Cubist") return Algorithm::ModelTree;
  if (name == "XGBoost") return Algorithm::XGB;
  fail(Errc::spec, "unknown algorithm \"" + std::string(name) +
                       "\" (expected SVR, ANN, ModelTree, RF, XGB, DNN or Mean)");
}

Algorithm LearnerSpec::algorithm() const { return static_cast<Algorithm>(params.index()); }

bool LearnerSpec::operator==(const LearnerSpec& other) const {
  return seed == other.seed && params == other.params;
}

LearnerSpec default_spec(Algorithm algorithm, std::uint64_t seed) {
  LearnerSpec spec;
  spec.seed = seed;
  switch (algorithm) {
    case Algorithm::SVR: spec.params = SvrParams{}; break;
    case Algorithm::ANN: spec.params = AnnParams{}; break;
    case Algorithm::ModelTree: spec.params = ModelTreeParams{}; break;
    case Algorithm::RF: spec.params = RfParams{}; break;
    case Algorithm::XGB: spec.params = XgbParams{}; break;
    case Algorithm::DNN: spec.params = DnnParams{}; break;
    case Algorithm::Mean: spec.params = MeanParams{}; break;
  }
  return spec;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void require(bool ok, Algorithm a, const std::string& what) {
  if (!ok) fail(Errc::spec, std::string(to_string(a)) + ": " + what);
}

void check_settings(const SvrParams& p) {
  require(p.epsilon >= 0.0, Algorithm::SVR, "epsilon must be >= 0");
  require(p.kkt_tolerance > 0.0 && p.gap_tolerance > 0.0, Algorithm::SVR, "tolerances must be > 0");
  require(p.max_iterations > 0, Algorithm::SVR, "max_iterations must be > 0");
}
void check_settings(const AnnParams& p) {
  require(p.epochs >= 0, Algorithm::ANN, "epochs must be >= 0");
  require(p.step > 0.0, Algorithm::ANN, "step must be > 0");
  require(p.momentum >= 0.0 && p.momentum < 1.0, Algorithm::ANN, "momentum must be in [0, 1)");
}
void check_settings(const ModelTreeParams& p) {
  require(p.min_leaf >= 1, Algorithm::ModelTree, "min_leaf must be >= 1");
  require(p.ridge >= 0.0, Algorithm::ModelTree, "ridge must be >= 0");
}
void check_settings(const RfParams& p) {
  require(p.min_leaf >= 1, Algorithm::RF, "min_leaf must be >= 1");
}
void check_settings(const XgbParams& p) {
  require(p.rounds >= 0, Algorithm::XGB, "rounds must be >= 0");
  require(p.early_stopping_rounds >= 0, Algorithm::XGB, "early_stopping_rounds must be >= 0");
  require(p.holdout_fraction >= 0.0 && p.holdout_fraction < 1.0, Algorithm::XGB,
          "holdout_fraction must be in [0, 1)");
}
void check_settings(const DnnParams& p) {
  require(p.epochs >= 0, Algorithm::DNN, "epochs must be >= 0");
  require(p.batch_size >= 1, Algorithm::DNN, "batch_size must be >= 1");
}
void check_settings(const MeanParams&) {}

}  // namespace

void validate(const LearnerSpec& spec) {
  const Algorithm a = spec.algorithm();
  std::visit(
      [&](auto params) {
        for_each_param(params, [&](std::string_view name, auto value, ParamRange r) {
          const double v = static_cast<double>(value);
          if (!(v >= r.lo && v <= r.hi)) {
            fail(Errc::spec, std::string(to_string(a)) + "." + std::string(name) + "=" + fmt(v) +
                                 " is outside its allowed range [" + fmt(r.lo) + ", " + fmt(r.hi) + "]");
          }
        });
        check_settings(params);
      },
      spec.params);
}

SpecSpace SpecSpace::defaults(Algorithm algorithm) { return SpecSpace{default_spec(algorithm), {}}; }

}  // namespace socmap
