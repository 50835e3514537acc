#include "socmap/learners/tune.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "socmap/error.hpp"
#include "socmap/learners/model.hpp"
#include "socmap/samples.hpp"

namespace socmap {

LearnerSpec sample_spec(const SpecSpace& space, Rng& rng, std::size_t max_features) {
  LearnerSpec spec = space.base;
  spec.seed = rng();
  if (auto* rf = std::get_if<RfParams>(&spec.params); rf && !rf->mtry) rf->mtry = 1;

  std::visit(
      [&](auto& params) {
        for_each_param(params, [&](std::string_view name, auto& value, ParamRange range) {
          for (const auto& [key, r] : space.overrides) {
            if (key == name) range = r;
          }
          double hi = range.hi;
          if (name == "mtry") hi = std::min(hi, static_cast<double>(max_features));
          if (!(range.lo <= hi)) {
            fail(Errc::spec, "empty search range for " + std::string(name));
          }
          double v;
          if (range.log_scale && range.lo > 0.0) {
            std::uniform_real_distribution<double> u(std::log(range.lo), std::log(hi));
            v = std::exp(u(rng));
          } else {
            std::uniform_real_distribution<double> u(range.lo, hi);
            v = u(rng);
          }
          v = std::clamp(v, range.lo, hi);
          using V = std::decay_t<decltype(value)>;
          if constexpr (std::is_integral_v<V>) {
            value = static_cast<V>(std::lround(v));
          } else {
            value = range.integer ? std::round(v) : v;
          }
        });
      },
      spec.params);
  return spec;
}

TuneResult tune_candidates(std::span<const LearnerSpec> candidates, const Matrix& x,
                           std::span<const double> y, std::size_t inner_k, std::uint64_t seed) {
  if (candidates.empty()) fail(Errc::spec, "tuning needs at least one candidate");
  if (inner_k < 2) fail(Errc::configuration, "inner fold count must be >= 2");
  const auto folds = assign_folds(x.rows(), inner_k, seed);

  TuneResult result;
  result.candidates.assign(candidates.begin(), candidates.end());
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double ss = 0.0;
    for (std::size_t f = 0; f < inner_k; ++f) {
      const auto train = folds.training_rows(f);
      const auto valid = folds.validation_rows(f);
      const Matrix xt = x.select_rows(train);
      std::vector<double> yt;
      for (auto r : train) yt.push_back(y[r]);
      const auto model = fit(candidates[c], xt, yt);
      const auto pred = predict(model, x.select_rows(valid));
      for (std::size_t i = 0; i < valid.size(); ++i) {
        const double d = pred[i] - y[valid[i]];
        ss += d * d;
      }
    }
    const double score = std::sqrt(ss / static_cast<double>(x.rows()));
    result.scores.push_back(score);
    if (score < best) {
      best = score;
      best_index = c;
    }
  }
  result.best = candidates[best_index];
  return result;
}

TuneResult tune(const SpecSpace& space, const Matrix& x, std::span<const double> y,
                std::size_t budget, std::size_t inner_k, std::uint64_t seed) {
  if (budget < 1) fail(Errc::configuration, "tuning budget must be >= 1");
  Rng rng(derive_seed(seed, "tune.sample"));
  std::vector<LearnerSpec> candidates;
  for (std::size_t b = 0; b < budget; ++b) candidates.push_back(sample_spec(space, rng, x.cols()));
  return tune_candidates(candidates, x, y, inner_k, derive_seed(seed, "tune.folds"));
}

}  // namespace socmap
