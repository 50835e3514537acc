#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "socmap/learners/spec.hpp"
#include "socmap/mask.hpp"
#include "socmap/samples.hpp"

namespace socmap {

struct GaConfig {
  std::size_t population = 50;
  double crossover_rate = 0.6;
  double mutation_rate = 0.001;
  std::size_t generations = 100;
  std::size_t restarts = 1;
  std::size_t fitness_folds = 10;
  std::size_t elitism = 2;
  std::uint64_t seed = 0;
  /// Random forest used to score chromosomes. mtry is always reset to
  /// ceil(sqrt(selected)).
  RfParams fitness_rf = [] {
    RfParams p;
    p.ntree = 200;
    return p;
  }();
  int threads = 0;
};

void validate(const GaConfig& config);

/// Memo of fitness values keyed by (mask bits, fold seed). Safe to share
/// between threads.
class FitnessCache {
 public:
  std::optional<double> find(const FeatureMask& mask, std::uint64_t fold_seed) const;
  void store(const FeatureMask& mask, std::uint64_t fold_seed, double value);
  std::size_t size() const;
  std::size_t fits() const;  // model fits performed by cache misses
  void count_fits(std::size_t n);

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::uint64_t>, double> values_;
  std::size_t fits_ = 0;
};

/// Mean validation RMSE (original target scale) of a random forest over the
/// folds, using only the masked columns. Fold f is fitted with seed
/// derive_seed(rf_seed, f).
double fitness(const FeatureMask& mask, const SampleTable& table, const FoldAssignment& folds,
               const RfParams& rf, std::uint64_t rf_seed, FitnessCache* cache = nullptr);

struct GaGeneration {
  std::size_t restart = 0;
  std::size_t generation = 0;  // 1-based within the restart
  double best_internal_rmse = 0.0;
  double mean_internal_rmse = 0.0;
  double external_rmse = std::numeric_limits<double>::quiet_NaN();
  FeatureMask best_mask;
};

struct GaTrace {
  std::vector<std::string> candidates;
  std::vector<std::string> training_ids;  // rows the fitness function saw
  std::vector<GaGeneration> generations;
  std::size_t fitness_evaluations = 0;  // distinct chromosomes scored
};

struct GaResult {
  FeatureMask best;
  double best_rmse = 0.0;
  GaTrace trace;
};

/// Evolves masks over `candidates` (feature names of `table`).
GaResult evolve(const SampleTable& table, std::span<const std::string> candidates,
                const GaConfig& config);

struct OuterSplit {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> holdout_rows;
};

OuterSplit outer_split(std::size_t n, double holdout_fraction, std::uint64_t seed);

/// Fills external_rmse for every generation: RF trained on the outer-train
/// rows with that generation's best mask, scored on the holdout rows.
/// Throws Errc::leakage if the holdout overlaps the training rows or any row
/// the GA fitness saw.
void external_validate(GaTrace& trace, const SampleTable& table, const OuterSplit& split,
                       const RfParams& rf, std::uint64_t seed);

struct ImportanceReport {
  std::vector<std::string> features;
  std::vector<double> percent;
};

/// Permutation importance on the training rows: mean RMSE increase over
/// `repeats` shuffles of each selected column, negatives clipped, scaled to
/// sum to 100. If no column matters every feature gets an equal share.
ImportanceReport importance(const SampleTable& table, const FeatureMask& mask, const RfParams& rf,
                            std::size_t repeats, std::uint64_t seed);

void write_trace_csv(const GaTrace& trace, const std::filesystem::path& path);
void write_mask_json(const FeatureMask& mask, std::span<const std::string> candidates,
                     const std::filesystem::path& path);
FeatureMask read_mask_json(std::span<const std::string> candidates,
                           const std::filesystem::path& path);

}  // namespace socmap
