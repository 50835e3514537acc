#include "socmap_cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "socmap/error.hpp"
#include "socmap/parallel.hpp"
#include "socmap/random.hpp"
#include "socmap/raster/terrain.hpp"
#include "socmap/version.hpp"

namespace socmap::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path command_dir(const RunConfig& config, const std::string& command) {
  const fs::path dir = config.output / command;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_manifest(const RunConfig& config, const std::string& command, const fs::path& dir) {
  std::vector<std::string> artifacts;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel != "manifest.json") artifacts.push_back(rel);
  }
  std::sort(artifacts.begin(), artifacts.end());
  const std::string hash = config_hash(config.document);
  json m = {{"tool", "socmap"},       {"version", kVersion}, {"command", command},
            {"config_hash", hash},    {"seed", config.seed}, {"artifacts", artifacts}};
  write_json(m, dir / "manifest.json");

  const fs::path run_manifest = config.output / "manifest.json";
  json run = json::object();
  if (std::ifstream in(run_manifest); in) {
    run = json::parse(in, nullptr, false);
    if (!run.is_object()) run = json::object();
  }
  run["tool"] = "socmap";
  run["version"] = kVersion;
  run["commands"][command] = {{"config_hash", hash}, {"directory", command}};
  write_json(run, run_manifest);
}

void require(bool present, const std::string& command, const std::string& what) {
  if (!present) fail(Errc::configuration, command + " needs \"" + what + "\" in the config");
}

SampleTable load_raw(const RunConfig& config) {
  auto table = load_samples(config.samples, config.schema);
  bool missing = false;
  for (const auto& r : table.rows()) {
    for (double v : r.covariates) missing = missing || is_missing(v);
  }
  if (missing) {
    if (!config.impute) fail(Errc::imputation, "samples contain missing covariates and impute is off");
    table = impute_missing(table);
  }
  return table;
}

SampleTable load_model_table(const RunConfig& config) {
  auto table = load_raw(config);
  if (config.log_transform) table = transform_target(table, TransformDirection::forward, config.offset);
  return table;
}

FeatureMask load_mask(const RunConfig& config, const SampleTable& table) {
  if (config.mask) return read_mask_json(table.feature_names(), *config.mask);
  return FeatureMask::all(table.feature_count());
}

FoldAssignment model_folds(const RunConfig& config, const SampleTable& table) {
  return assign_folds(table, config.folds, derive_seed(config.seed, "folds"));
}

json stats_to_json(const DescriptiveStats& s) {
  return {{"n", s.n},    {"min", s.min},           {"max", s.max},           {"mean", s.mean},
          {"sd", s.sd},  {"cv", s.cv},             {"skewness", s.skewness}, {"kurtosis", s.kurtosis},
          {"ks_p", s.ks_p}};
}

json transform_json(const RunConfig& config) {
  return {{"kind", config.log_transform ? "log" : "none"}, {"offset", config.offset}};
}

std::string mean_sd(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f ± %.3f", mean, sd);
  return buf;
}

json table_row(const CvRun& run) {
  const auto& m = run.metrics;
  json display = {{"MAE", mean_sd(m.mean.mae, m.sd.mae)},
                  {"RMSE", mean_sd(m.mean.rmse, m.sd.rmse)},
                  {"R2", mean_sd(m.mean.r2, m.sd.r2)},
                  {"CCC", mean_sd(m.mean.ccc, m.sd.ccc)}};
  return {{"algorithm", to_string(run.spec.algorithm())},
          {"mean", metrics_to_json(m.mean)},
          {"sd", metrics_to_json(m.sd)},
          {"display", display}};
}

RasterGrid load_on_grid(const fs::path& path, const std::optional<GridDef>& target, Resampling method) {
  auto grid = read_ascii_grid(path);
  if (target && !grid.def().aligned_with(*target)) grid = resample(grid, *target, method);
  return grid;
}

}  // namespace

json cmd_stats(const RunConfig& config, std::ostream& log) {
  require(!config.samples.empty(), "stats", "samples");
  const auto raw = load_raw(config);
  json report = {{"target", raw.target_name()},
                 {"transform", transform_json(config)},
                 {"original", stats_to_json(describe(raw))},
                 {"transformed", nullptr}};
  if (config.log_transform) {
    const auto t = transform_target(raw, TransformDirection::forward, config.offset);
    report["transformed"] = stats_to_json(describe(t));
  }
  const auto dir = command_dir(config, "stats");
  write_json(report, dir / "stats.json");
  write_manifest(config, "stats", dir);
  log << "stats: " << raw.size() << " samples -> " << (dir / "stats.json").string() << '\n';
  return report;
}

json cmd_covariates(const RunConfig& config, std::ostream& log) {
  const auto& cov = config.covariates;
  require(!cov.bands.empty() || cov.dem || !cov.external.empty(), "covariates",
          "covariates.bands, covariates.dem or covariates.external");

  // Resolve every request against the inputs before reading any grid.
  std::set<std::string> supplied;
  for (const auto& [name, path] : cov.bands) supplied.insert(find_covariate(name).name);
  for (const auto& [name, path] : cov.external) supplied.insert(name);
  if (cov.dem) supplied.insert("DEM");
  std::vector<const CovariateEntry*> wanted;
  for (const auto& name : cov.indices) {
    const auto& e = find_covariate(name);
    if (e.kind == LayerKind::external && !supplied.contains(e.name)) {
      fail(Errc::dependency, e.name + " is external-only and cannot be computed; supply it under "
                                      "covariates.external");
    }
    if (e.kind == LayerKind::unsupported) {
      band_index(RasterStack{}, e.name);  // raises the registry error
    }
    if (e.kind == LayerKind::terrain && !cov.dem) {
      fail(Errc::dependency, e.name + " needs covariates.dem");
    }
    if (e.kind == LayerKind::band && !supplied.contains(e.name)) {
      fail(Errc::dependency, e.name + " is an input band; supply it under covariates.bands");
    }
    if (e.kind == LayerKind::index) {
      for (const auto& b : e.inputs) {
        if (!supplied.contains(b)) fail(Errc::dependency, e.name + " needs band \"" + b + "\"");
      }
    }
    wanted.push_back(&e);
  }
  std::vector<TerrainAttribute> attributes;
  for (const auto& name : cov.terrain) {
    if (!cov.dem) fail(Errc::dependency, "terrain attribute " + name + " needs covariates.dem");
    attributes.push_back(terrain_attribute_from_string(name));
  }
  for (const auto* e : wanted) {
    if (e->kind == LayerKind::terrain) attributes.push_back(terrain_attribute_from_string(e->name));
  }

  std::optional<GridDef> target;
  if (cov.target_grid) {
    target = read_ascii_grid(*cov.target_grid).def();
  } else if (!cov.bands.empty()) {
    target = read_ascii_grid(cov.bands.front().second).def();
  } else if (cov.dem) {
    target = read_ascii_grid(*cov.dem).def();
  } else {
    target = read_ascii_grid(cov.external.front().second).def();
  }

  RasterStack stack;
  for (const auto& [name, path] : cov.bands) {
    stack.add(find_covariate(name).name, load_on_grid(path, target, cov.resampling));
  }
  std::optional<RasterGrid> dem;
  if (cov.dem) {
    dem = load_on_grid(*cov.dem, target, cov.resampling);
    stack.add("DEM", *dem);
  }
  for (const auto& [name, path] : cov.external) stack.add(name, load_on_grid(path, target, cov.resampling));

  std::vector<std::string> computed;
  for (const auto* e : wanted) {
    if (e->kind != LayerKind::index || stack.find(e->name)) continue;
    stack.add(e->name, band_index(stack, e->name, cov.params));
    computed.push_back(e->name);
  }
  for (auto a : attributes) {
    std::string name(to_string(a));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::toupper(ch); });
    if (stack.find(name)) continue;
    stack.add(name, terrain(*dem, a));
    computed.push_back(name);
  }

  const auto dir = command_dir(config, "covariates");
  write_stack(stack, dir / "stack.json");
  write_manifest(config, "covariates", dir);
  log << "covariates: " << stack.size() << " layers on " << target->ncols << "x" << target->nrows
      << " grid -> " << (dir / "stack.json").string() << '\n';
  return {{"layers", stack.names()},
          {"computed", computed},
          {"grid",
           {{"ncols", target->ncols},
            {"nrows", target->nrows},
            {"xllcorner", target->xll},
            {"yllcorner", target->yll},
            {"cellsize", target->cellsize}}},
          {"stack", (dir / "stack.json").string()}};
}

json cmd_select(const RunConfig& config, std::ostream& log) {
  require(!config.samples.empty(), "select", "samples");
  const auto table = load_model_table(config);
  const auto& candidates = table.feature_names();
  const auto dir = command_dir(config, "select");
  const auto& ga = config.select.ga;

  json report;
  if (candidates.size() == 1) {
    log << "select: only one candidate feature (" << candidates.front() << "); GA skipped\n";
    const auto mask = FeatureMask::all(1);
    GaTrace trace;
    trace.candidates = candidates;
    write_trace_csv(trace, dir / "trace.csv");
    write_mask_json(mask, candidates, dir / "mask.json");
    report = {{"skipped", true},
              {"notice", "single candidate feature; GA skipped"},
              {"selected", candidates},
              {"n_candidates", 1}};
  } else {
    const auto split = outer_split(table.size(), config.select.holdout_fraction, derive_seed(ga.seed, "outer"));
    const auto train = table.subset(split.train_rows);
    auto result = evolve(train, candidates, ga);
    RfParams rf = ga.fitness_rf;
    external_validate(result.trace, table, split, rf, derive_seed(ga.seed, "external"));
    write_trace_csv(result.trace, dir / "trace.csv");
    write_mask_json(result.best, candidates, dir / "mask.json");
    const auto& last = result.trace.generations.back();
    report = {{"skipped", false},
              {"selected", result.best.names(candidates)},
              {"n_selected", result.best.selected_count()},
              {"n_candidates", candidates.size()},
              {"best_internal_rmse", result.best_rmse},
              {"final_external_rmse", last.external_rmse},
              {"fitness_evaluations", result.trace.fitness_evaluations},
              {"generations", result.trace.generations.size()},
              {"train_rows", split.train_rows.size()},
              {"holdout_rows", split.holdout_rows.size()}};
    log << "select: " << result.best.selected_count() << " of " << candidates.size()
        << " features, internal RMSE " << result.best_rmse << '\n';
  }
  write_json(report, dir / "selection.json");
  write_manifest(config, "select", dir);
  return report;
}

json cmd_evaluate(const RunConfig& config, std::ostream& log) {
  require(!config.samples.empty(), "evaluate", "samples");
  const auto table = load_model_table(config);
  const auto mask = load_mask(config, table);
  const auto folds = model_folds(config, table);

  std::vector<LearnerSpec> specs = config.learners;
  if (config.baseline) specs.push_back(default_spec(Algorithm::Mean, derive_seed(config.seed, "learner:Mean")));
  auto comparison = compare(table, mask, specs, folds, config.cv);

  const std::size_t n_learners = config.learners.size();
  std::vector<FoldedMetrics> metrics;
  for (std::size_t i = 0; i < n_learners; ++i) metrics.push_back(comparison.runs[i].metrics);
  const std::size_t best = pick_best(metrics);

  const auto dir = command_dir(config, "evaluate");
  json rows = json::array();
  for (std::size_t i = 0; i < n_learners; ++i) {
    auto row = table_row(comparison.runs[i]);
    row["best"] = i == best;
    rows.push_back(row);
    save_cv_run(comparison.runs[i], dir / std::string(to_string(comparison.runs[i].spec.algorithm())));
  }
  json report = {{"metric_scale", "original"},
                 {"folds", config.folds},
                 {"fold_seed", folds.seed},
                 {"features", mask.names(table.feature_names())},
                 {"transform", transform_json(config)},
                 {"rows", rows},
                 {"best", to_string(comparison.runs[best].spec.algorithm())},
                 {"baseline", nullptr}};
  if (config.baseline) report["baseline"] = table_row(comparison.runs.back());
  write_json(report, dir / "comparison.json");
  write_manifest(config, "evaluate", dir);
  for (const auto& r : rows) {
    log << "evaluate: " << r["algorithm"].get<std::string>() << "  RMSE "
        << r["display"]["RMSE"].get<std::string>() << (r["best"].get<bool>() ? "  (best)" : "") << '\n';
  }
  return report;
}

json cmd_map(const RunConfig& config, std::ostream& log) {
  require(!config.samples.empty(), "map", "samples");
  require(!config.stack.empty(), "map", "stack");
  const auto table = load_model_table(config);
  const auto mask = load_mask(config, table);
  const auto names = mask.names(table.feature_names());

  const auto stack = load_stack(config.stack);
  for (const auto& n : names) {
    if (!stack.find(n)) fail(Errc::dependency, "stack " + config.stack.string() + " has no layer \"" + n + "\"");
  }
  std::vector<std::pair<std::string, RasterGrid>> classes;
  for (const auto& [label, path] : config.map.classes) {
    auto grid = read_ascii_grid(path);
    if (!grid.def().aligned_with(stack.def())) {
      fail(Errc::alignment, "class map " + label + " is not aligned with the stack grid");
    }
    classes.emplace_back(label, std::move(grid));
  }

  const auto folds = model_folds(config, table);
  const auto run = cross_validate(table, mask, config.map.spec, folds, config.cv);
  const auto bundle = predict_map(run, stack, config.map.interval);

  const auto dir = command_dir(config, "map");
  write_bundle(bundle, dir);
  const auto cov = coverage(run, table, config.map.interval, config.map.exclude_own_fold);
  json cov_json = coverage_to_json(cov);
  write_json(cov_json, dir / "coverage.json");

  RfParams rf;
  if (const auto* p = std::get_if<RfParams>(&config.map.spec.params)) rf = *p;
  const auto imp = importance(table, mask, rf, config.map.importance_repeats, derive_seed(config.seed, "importance"));
  json imp_json = json::array();
  for (std::size_t i = 0; i < imp.features.size(); ++i) {
    imp_json.push_back({{"feature", imp.features[i]}, {"percent", imp.percent[i]}});
  }
  write_json(imp_json, dir / "importance.json");

  json strata = json::object();
  for (const auto& [label, grid] : classes) {
    const auto summary = stratify(bundle.mean, grid, config.map.alpha);
    write_stratified_csv(summary, dir / ("stratified_" + label + ".csv"));
    json rows = json::array();
    for (const auto& r : summary.rows) {
      rows.push_back({{"class", r.label}, {"n", r.n}, {"mean", r.mean}, {"cv", r.cv}, {"letters", r.letters}});
    }
    strata[label] = {{"rows", rows}, {"warnings", summary.warnings}};
    for (const auto& w : summary.warnings) log << "map: " << label << ": " << w << '\n';
  }
  save_cv_run(run, dir / "cv");

  json report = {{"learner", to_string(run.spec.algorithm())},
                 {"features", names},
                 {"metrics", folded_to_json(run.metrics)},
                 {"coverage", cov_json},
                 {"importance", imp_json},
                 {"strata", strata},
                 {"z", bundle.z},
                 {"ci_level", bundle.ci_level}};
  write_json(report, dir / "map.json");
  write_manifest(config, "map", dir);
  log << "map: " << bundle.mean.valid_count() << " cells predicted, coverage " << cov.pct_inside
      << "% inside -> " << dir.string() << '\n';
  return report;
}

json run_command(const std::string& name, const RunConfig& config, std::ostream& log) {
  if (config.threads > 0) set_default_threads(config.threads);
  if (name == "stats") return cmd_stats(config, log);
  if (name == "covariates") return cmd_covariates(config, log);
  if (name == "select") return cmd_select(config, log);
  if (name == "evaluate") return cmd_evaluate(config, log);
  if (name == "map") return cmd_map(config, log);
  fail(Errc::configuration, "unknown command \"" + name + "\" (expected stats, covariates, select, evaluate or map)");
}

}  // namespace socmap::cli
