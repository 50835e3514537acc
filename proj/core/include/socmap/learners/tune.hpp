#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "socmap/learners/spec.hpp"
#include "socmap/matrix.hpp"
#include "socmap/random.hpp"

namespace socmap {

/// Draws one spec: uniform per bounded parameter, log-uniform where the range
/// is flagged log-scale, integers rounded. `max_features` caps RF mtry.
LearnerSpec sample_spec(const SpecSpace& space, Rng& rng, std::size_t max_features);

struct TuneResult {
  LearnerSpec best;
  std::vector<LearnerSpec> candidates;
  std::vector<double> scores;  // inner-CV RMSE per candidate
};

/// Scores each candidate by inner k-fold RMSE; the lowest wins, earlier index
/// on ties.
TuneResult tune_candidates(std::span<const LearnerSpec> candidates, const Matrix& x,
                           std::span<const double> y, std::size_t inner_k, std::uint64_t seed);

/// Random search over `space` with `budget` draws.
TuneResult tune(const SpecSpace& space, const Matrix& x, std::span<const double> y,
                std::size_t budget, std::size_t inner_k, std::uint64_t seed);

}  // namespace socmap
