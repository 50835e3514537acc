#include "socmap/gasel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "socmap/error.hpp"
#include "socmap/learners/ensemble.hpp"
#include "socmap/metrics.hpp"
#include "socmap/parallel.hpp"
#include "socmap/random.hpp"

namespace socmap {

namespace {

RfParams masked_rf(const RfParams& rf, std::size_t selected) {
  RfParams p = rf;
  p.mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(selected))));
  return p;
}

std::vector<double> original_scale(const TargetTransform& t, std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = t.backward(v[i]);
  return out;
}

Matrix complete_features(const SampleTable& table, std::span<const std::size_t> columns) {
  Matrix x = table.features(columns);
  for (double v : x.data()) {
    if (is_missing(v)) fail(Errc::data, "covariates contain missing values; impute them first");
  }
  return x;
}

std::vector<std::size_t> candidate_columns(const SampleTable& table,
                                           std::span<const std::string> candidates) {
  std::vector<std::size_t> cols;
  for (const auto& name : candidates) {
    auto idx = table.feature_index(name);
    if (!idx) fail(Errc::schema, "candidate feature \"" + name + "\" is not in the sample table");
    cols.push_back(*idx);
  }
  return cols;
}

double holdout_rmse(const Matrix& x, std::span<const double> y, const TargetTransform& transform,
                    std::span<const std::size_t> train, std::span<const std::size_t> test,
                    const RfParams& rf, std::uint64_t seed) {
  std::vector<double> ytr;
  ytr.reserve(train.size());
  for (auto r : train) ytr.push_back(y[r]);
  const auto model = fit_random_forest(x.select_rows(train), ytr, rf, seed);
  std::vector<double> obs, pred;
  for (auto r : test) {
    obs.push_back(transform.backward(y[r]));
    pred.push_back(transform.backward(model.predict(x.row(r))));
  }
  return rmse(obs, pred);
}

}  // namespace

void validate(const GaConfig& c) {
  auto bad = [](const std::string& msg) { fail(Errc::configuration, msg); };
  if (c.population < 2 || c.population % 2 != 0) bad("GA population must be even and at least 2");
  if (!(c.crossover_rate >= 0.0 && c.crossover_rate <= 1.0)) bad("GA crossover_rate must be in [0, 1]");
  if (!(c.mutation_rate >= 0.0 && c.mutation_rate <= 1.0)) bad("GA mutation_rate must be in [0, 1]");
  if (c.generations < 1) bad("GA generations must be at least 1");
  if (c.restarts < 1) bad("GA restarts must be at least 1");
  if (c.fitness_folds < 2) bad("GA fitness_folds must be at least 2");
  if (c.elitism > c.population) bad("GA elitism cannot exceed the population size");
  if (c.fitness_rf.ntree < 1) bad("GA fitness forest needs at least one tree");
  if (c.fitness_rf.min_leaf < 1) bad("GA fitness forest min_leaf must be >= 1");
}

std::optional<double> FitnessCache::find(const FeatureMask& mask, std::uint64_t fold_seed) const {
  std::lock_guard lock(mutex_);
  auto it = values_.find({mask.to_string(), fold_seed});
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void FitnessCache::store(const FeatureMask& mask, std::uint64_t fold_seed, double value) {
  std::lock_guard lock(mutex_);
  values_[{mask.to_string(), fold_seed}] = value;
}

std::size_t FitnessCache::size() const {
  std::lock_guard lock(mutex_);
  return values_.size();
}

std::size_t FitnessCache::fits() const {
  std::lock_guard lock(mutex_);
  return fits_;
}

void FitnessCache::count_fits(std::size_t n) {
  std::lock_guard lock(mutex_);
  fits_ += n;
}

double fitness(const FeatureMask& mask, const SampleTable& table, const FoldAssignment& folds,
               const RfParams& rf, std::uint64_t rf_seed, FitnessCache* cache) {
  if (mask.size() != table.feature_count()) fail(Errc::shape, "mask length differs from feature count");
  if (!mask.valid()) fail(Errc::configuration, "fitness of an empty mask is undefined");
  if (folds.fold_of.size() != table.size()) fail(Errc::shape, "fold assignment does not cover the table");

  const std::uint64_t key = derive_seed(folds.seed, rf_seed);
  if (cache) {
    if (auto hit = cache->find(mask, key)) return *hit;
  }

  const auto cols = mask.indices();
  const Matrix x = complete_features(table, cols);
  const auto y = table.targets();
  const RfParams params = masked_rf(rf, cols.size());

  std::vector<double> fold_rmse(folds.k);
  parallel_for(folds.k, [&](std::size_t f) {
    const auto train = folds.training_rows(f);
    const auto test = folds.validation_rows(f);
    if (train.size() < 5) fail(Errc::insufficient_data, "fitness fold has fewer than 5 training rows");
    fold_rmse[f] = holdout_rmse(x, y, table.transform(), train, test, params, derive_seed(rf_seed, f));
  });
  double sum = 0.0;
  for (double r : fold_rmse) sum += r;
  const double value = sum / static_cast<double>(folds.k);

  if (cache) {
    cache->count_fits(folds.k);
    cache->store(mask, key, value);
  }
  return value;
}

GaResult evolve(const SampleTable& table, std::span<const std::string> candidates,
                const GaConfig& config) {
  validate(config);
  const std::size_t p = candidates.size();
  if (p < 2) fail(Errc::configuration, "GA needs at least two candidate features, got " + std::to_string(p));
  const auto cols = candidate_columns(table, candidates);
  const SampleTable data = table.select_features(cols);
  std::vector<std::size_t> all(p);
  std::iota(all.begin(), all.end(), 0);
  complete_features(data, all);

  const auto folds = assign_folds(data, config.fitness_folds, derive_seed(config.seed, "fitness-folds"));
  const std::uint64_t rf_seed = derive_seed(config.seed, "fitness-rf");
  FitnessCache cache;

  auto score = [&](const std::vector<FeatureMask>& pop) {
    std::vector<FeatureMask> pending;
    std::set<FeatureMask> seen;
    for (const auto& m : pop) {
      if (!m.valid()) fail(Errc::state, "empty chromosome reached fitness evaluation");
      if (seen.insert(m).second && !cache.find(m, derive_seed(folds.seed, rf_seed))) {
        pending.push_back(m);
      }
    }
    parallel_for(
        pending.size(),
        [&](std::size_t i) { fitness(pending[i], data, folds, config.fitness_rf, rf_seed, &cache); },
        config.threads);
    std::vector<double> out;
    out.reserve(pop.size());
    for (const auto& m : pop) out.push_back(*cache.find(m, derive_seed(folds.seed, rf_seed)));
    return out;
  };

  GaResult result;
  result.trace.candidates.assign(candidates.begin(), candidates.end());
  for (const auto& r : data.rows()) result.trace.training_ids.push_back(r.id);
  result.best_rmse = std::numeric_limits<double>::infinity();

  const std::size_t n_pop = config.population;
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_gene(0, p - 1);
  std::uniform_int_distribution<std::size_t> cut_point(1, p - 1);
  std::uniform_int_distribution<std::size_t> any_member(0, n_pop - 1);

  for (std::size_t restart = 0; restart < config.restarts; ++restart) {
    Rng rng(derive_seed(derive_seed(config.seed, "ga"), restart));
    auto repair = [&](FeatureMask& m) {
      if (!m.valid()) m.set(any_gene(rng), true);
    };

    std::vector<FeatureMask> pop;
    for (std::size_t i = 0; i < n_pop; ++i) {
      std::vector<std::uint8_t> bits(p);
      for (auto& b : bits) b = coin(rng) ? 1 : 0;
      FeatureMask m(std::move(bits));
      repair(m);
      pop.push_back(std::move(m));
    }

    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
      const auto fit = score(pop);
      std::vector<std::size_t> order(n_pop);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fit[a] < fit[b]; });

      GaGeneration record;
      record.restart = restart;
      record.generation = gen;
      record.best_internal_rmse = fit[order.front()];
      record.mean_internal_rmse =
          std::accumulate(fit.begin(), fit.end(), 0.0) / static_cast<double>(n_pop);
      record.best_mask = pop[order.front()];
      result.trace.generations.push_back(record);
      if (record.best_internal_rmse < result.best_rmse) {
        result.best_rmse = record.best_internal_rmse;
        result.best = record.best_mask;
      }
      if (gen == config.generations) break;

      auto tournament = [&] {
        const std::size_t a = any_member(rng);
        const std::size_t b = any_member(rng);
        if (fit[a] < fit[b] || (fit[a] == fit[b] && a < b)) return a;
        return b;
      };

      std::vector<FeatureMask> next;
      next.reserve(n_pop);
      for (std::size_t e = 0; e < config.elitism; ++e) next.push_back(pop[order[e]]);
      while (next.size() < n_pop) {
        FeatureMask a = pop[tournament()];
        FeatureMask b = pop[tournament()];
        if (unit(rng) < config.crossover_rate) {
          const std::size_t cut = cut_point(rng);
          for (std::size_t g = cut; g < p; ++g) {
            const bool tmp = a.test(g);
            a.set(g, b.test(g));
            b.set(g, tmp);
          }
        }
        for (auto* child : {&a, &b}) {
          for (std::size_t g = 0; g < p; ++g) {
            if (unit(rng) < config.mutation_rate) child->flip(g);
          }
          repair(*child);
        }
        next.push_back(std::move(a));
        if (next.size() < n_pop) next.push_back(std::move(b));
      }
      pop = std::move(next);
    }
  }
  result.trace.fitness_evaluations = cache.size();
  return result;
}

OuterSplit outer_split(std::size_t n, double holdout_fraction, std::uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    fail(Errc::configuration, "holdout fraction must be in (0, 1)");
  }
  const auto n_hold = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
  if (n_hold < 1 || n - n_hold < 5) {
    fail(Errc::insufficient_data, "outer split of " + std::to_string(n) + " rows leaves too few on one side");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  OuterSplit split;
  split.holdout_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
  split.train_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
  std::sort(split.holdout_rows.begin(), split.holdout_rows.end());
  std::sort(split.train_rows.begin(), split.train_rows.end());
  return split;
}

void external_validate(GaTrace& trace, const SampleTable& table, const OuterSplit& split,
                       const RfParams& rf, std::uint64_t seed) {
  std::set<std::size_t> train(split.train_rows.begin(), split.train_rows.end());
  for (auto r : split.holdout_rows) {
    if (r >= table.size()) fail(Errc::shape, "holdout row out of range");
    if (train.count(r)) fail(Errc::leakage, "holdout row " + std::to_string(r) + " is also a training row");
  }
  std::set<std::string> seen(trace.training_ids.begin(), trace.training_ids.end());
  for (auto r : split.holdout_rows) {
    if (seen.count(table.row(r).id)) {
      fail(Errc::leakage, "holdout sample \"" + table.row(r).id + "\" was used by the GA fitness");
    }
  }

  const auto cols = candidate_columns(table, trace.candidates);
  const auto y = table.targets();
  std::map<FeatureMask, double> memo;
  for (auto& g : trace.generations) {
    auto it = memo.find(g.best_mask);
    if (it == memo.end()) {
      std::vector<std::size_t> selected;
      for (auto i : g.best_mask.indices()) selected.push_back(cols[i]);
      const Matrix x = complete_features(table, selected);
      const double value = holdout_rmse(x, y, table.transform(), split.train_rows, split.holdout_rows,
                                        masked_rf(rf, selected.size()), seed);
      it = memo.emplace(g.best_mask, value).first;
    }
    g.external_rmse = it->second;
  }
}

ImportanceReport importance(const SampleTable& table, const FeatureMask& mask, const RfParams& rf,
                            std::size_t repeats, std::uint64_t seed) {
  if (repeats < 1) fail(Errc::configuration, "importance needs at least one repeat");
  if (mask.size() != table.feature_count()) fail(Errc::shape, "mask length differs from feature count");
  if (!mask.valid()) fail(Errc::configuration, "importance of an empty mask is undefined");

  const auto cols = mask.indices();
  const Matrix x = complete_features(table, cols);
  const auto y = table.targets();
  const auto& transform = table.transform();
  const auto model = fit_random_forest(x, y, masked_rf(rf, cols.size()), derive_seed(seed, "importance-rf"));
  const auto observed = original_scale(transform, y);

  auto score = [&](const Matrix& m) {
    std::vector<double> pred(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) pred[i] = transform.backward(model.predict(m.row(i)));
    return rmse(observed, pred);
  };
  const double base = score(x);

  std::vector<double> raw(cols.size());
  parallel_for(cols.size(), [&](std::size_t j) {
    Rng rng(derive_seed(seed, j));
    std::vector<std::size_t> perm(x.rows());
    double total = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix shuffled = x;
      for (std::size_t i = 0; i < x.rows(); ++i) shuffled(i, j) = x(perm[i], j);
      total += score(shuffled) - base;
    }
    raw[j] = std::max(0.0, total / static_cast<double>(repeats));
  });

  ImportanceReport report;
  report.features = mask.names(table.feature_names());
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  report.percent.resize(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    report.percent[j] = sum > 0.0 ? 100.0 * raw[j] / sum : 100.0 / static_cast<double>(raw.size());
  }
  return report;
}

void write_trace_csv(const GaTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  bool restarts = false;
  for (const auto& g : trace.generations) restarts = restarts || g.restart > 0;
  out << "generation,best_internal_rmse,mean_internal_rmse,external_rmse,selected_count";
  out << (restarts ? ",restart\n" : "\n");
  out.precision(17);
  for (const auto& g : trace.generations) {
    out << g.generation << ',' << g.best_internal_rmse << ',' << g.mean_internal_rmse << ',';
    if (std::isnan(g.external_rmse)) {
      out << "NA";
    } else {
      out << g.external_rmse;
    }
    out << ',' << g.best_mask.selected_count();
    if (restarts) out << ',' << g.restart;
    out << '\n';
  }
  if (!out) fail(Errc::io, "failed writing " + path.string());
}

void write_mask_json(const FeatureMask& mask, std::span<const std::string> candidates,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out << nlohmann::json(mask.names(candidates)).dump(2) << '\n';
}

FeatureMask read_mask_json(std::span<const std::string> candidates,
                           const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::vector<std::string> names;
  try {
    names = nlohmann::json::parse(in).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, path.string() + " is not a JSON list of feature names: " + e.what());
  }
  return FeatureMask::from_names(candidates, names);
}

}  // namespace socmap
