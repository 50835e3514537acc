#include "socmap_cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "socmap/error.hpp"
#include "socmap/learners/model_io.hpp"
#include "socmap/random.hpp"
#include "socmap/raster/terrain.hpp"

namespace socmap::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(Errc::configuration, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) {
      std::string list;
      for (const char* k : keys) list += (list.empty() ? "" : ", ") + std::string(k);
      fail(Errc::configuration, "unknown key \"" + key + "\" in " + where + " (allowed: " + list + ")");
    }
  }
}

template <class T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(Errc::configuration, where + "." + key + " has the wrong type");
  }
}

std::filesystem::path existing(const std::filesystem::path& base, const std::string& value,
                               const std::string& what) {
  std::filesystem::path p = value;
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) fail(Errc::io, what + " not found: " + p.string());
  return p;
}

std::vector<std::pair<std::string, std::filesystem::path>> path_map(const json& j,
                                                                    const std::filesystem::path& base,
                                                                    const std::string& where) {
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  if (j.is_null()) return out;
  if (!j.is_object()) fail(Errc::configuration, where + " must map names to paths");
  for (const auto& [name, value] : j.items()) {
    if (!value.is_string()) fail(Errc::configuration, where + "." + name + " must be a path string");
    out.emplace_back(name, existing(base, value.get<std::string>(), where + "." + name));
  }
  return out;
}

LearnerSpec learner_from(const json& j, std::uint64_t seed) {
  LearnerSpec spec;
  if (j.is_string()) {
    spec = default_spec(algorithm_from_string(j.get<std::string>()));
    spec.seed = derive_seed(seed, "learner:" + std::string(to_string(spec.algorithm())));
  } else {
    spec = spec_from_json(j);
    if (!j.contains("seed")) {
      spec.seed = derive_seed(seed, "learner:" + std::string(to_string(spec.algorithm())));
    }
  }
  validate(spec);
  return spec;
}

}  // namespace

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::parse, "config " + path.string() + " is not valid JSON: " + e.what());
  }
}

void apply_override(json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(Errc::configuration, "override \"" + assignment + "\" must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &document;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) fail(Errc::configuration, "override path \"" + path + "\" crosses a non-object");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) fail(Errc::configuration, "override path \"" + path + "\" crosses a non-object");
  (*node)[parts.back()] = value;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base) {
  check_keys(doc, "config",
             {"samples", "schema", "stack", "output", "mask", "seed", "threads", "transform", "impute",
              "folds", "learners", "baseline", "tune", "select", "map", "covariates"});
  RunConfig c;
  c.document = doc;
  if (doc.contains("samples")) c.samples = existing(base, get<std::string>(doc, "samples", "", "config"), "samples file");
  if (doc.contains("stack")) c.stack = existing(base, get<std::string>(doc, "stack", "", "config"), "stack manifest");
  if (doc.contains("mask")) c.mask = existing(base, get<std::string>(doc, "mask", "", "config"), "mask file");
  {
    std::filesystem::path out = get<std::string>(doc, "output", "socmap_out", "config");
    c.output = out.is_relative() ? base / out : out;
  }
  c.seed = get<std::uint64_t>(doc, "seed", 0, "config");
  c.threads = get<int>(doc, "threads", 0, "config");
  if (c.threads < 0) fail(Errc::configuration, "threads must be >= 0");

  if (auto it = doc.find("schema"); it != doc.end()) {
    check_keys(*it, "schema", {"id", "x", "y", "target", "covariates"});
    c.schema.id_column = get<std::string>(*it, "id", c.schema.id_column, "schema");
    c.schema.x_column = get<std::string>(*it, "x", c.schema.x_column, "schema");
    c.schema.y_column = get<std::string>(*it, "y", c.schema.y_column, "schema");
    c.schema.target_column = get<std::string>(*it, "target", c.schema.target_column, "schema");
    c.schema.covariates = get<std::vector<std::string>>(*it, "covariates", {}, "schema");
    if (c.schema.target_column.empty()) fail(Errc::configuration, "schema.target must name one column");
  }

  if (auto it = doc.find("transform"); it != doc.end()) {
    std::string kind;
    if (it->is_string()) {
      kind = it->get<std::string>();
    } else {
      check_keys(*it, "transform", {"kind", "offset"});
      kind = get<std::string>(*it, "kind", "log", "transform");
      c.offset = get<double>(*it, "offset", 1.0, "transform");
    }
    if (kind == "log") {
      c.log_transform = true;
    } else if (kind == "none" || kind == "identity") {
      c.log_transform = false;
    } else {
      fail(Errc::configuration, "transform must be \"log\" or \"none\", got \"" + kind + "\"");
    }
  }
  c.impute = get<bool>(doc, "impute", true, "config");
  c.folds = get<std::size_t>(doc, "folds", 10, "config");
  if (c.folds < 2) fail(Errc::configuration, "folds must be >= 2");

  if (auto it = doc.find("learners"); it != doc.end()) {
    if (!it->is_array() || it->empty()) fail(Errc::configuration, "learners must be a non-empty array");
    for (const auto& l : *it) c.learners.push_back(learner_from(l, c.seed));
  } else {
    for (auto a : kStudyAlgorithms) c.learners.push_back(learner_from(json(std::string(to_string(a))), c.seed));
  }
  c.baseline = get<bool>(doc, "baseline", true, "config");

  if (auto it = doc.find("tune"); it != doc.end()) {
    check_keys(*it, "tune", {"mode", "budget", "inner_folds"});
    const auto mode = get<std::string>(*it, "mode", "none", "tune");
    if (mode == "none") {
      c.cv.tune = TuneMode::none;
    } else if (mode == "nested") {
      c.cv.tune = TuneMode::nested;
    } else if (mode == "global") {
      c.cv.tune = TuneMode::global;
    } else {
      fail(Errc::configuration, "tune.mode must be none, nested or global");
    }
    c.cv.tune_budget = get<std::size_t>(*it, "budget", 20, "tune");
    c.cv.inner_folds = get<std::size_t>(*it, "inner_folds", 5, "tune");
    if (c.cv.tune_budget < 1 || c.cv.inner_folds < 2) fail(Errc::configuration, "tune needs budget >= 1 and inner_folds >= 2");
  }
  c.cv.threads = c.threads;

  auto& ga = c.select.ga;
  ga.seed = derive_seed(c.seed, "select");
  ga.threads = c.threads;
  if (auto it = doc.find("select"); it != doc.end()) {
    check_keys(*it, "select", {"population", "crossover_rate", "mutation_rate", "generations", "restarts",
                               "fitness_folds", "elitism", "fitness_ntree", "holdout_fraction"});
    ga.population = get<std::size_t>(*it, "population", ga.population, "select");
    ga.crossover_rate = get<double>(*it, "crossover_rate", ga.crossover_rate, "select");
    ga.mutation_rate = get<double>(*it, "mutation_rate", ga.mutation_rate, "select");
    ga.generations = get<std::size_t>(*it, "generations", ga.generations, "select");
    ga.restarts = get<std::size_t>(*it, "restarts", ga.restarts, "select");
    ga.fitness_folds = get<std::size_t>(*it, "fitness_folds", ga.fitness_folds, "select");
    ga.elitism = get<std::size_t>(*it, "elitism", ga.elitism, "select");
    ga.fitness_rf.ntree = get<int>(*it, "fitness_ntree", ga.fitness_rf.ntree, "select");
    c.select.holdout_fraction = get<double>(*it, "holdout_fraction", c.select.holdout_fraction, "select");
  }
  validate(ga);
  if (!(c.select.holdout_fraction > 0.0 && c.select.holdout_fraction < 1.0)) {
    fail(Errc::configuration, "select.holdout_fraction must be in (0, 1)");
  }

  c.map.spec = learner_from(json("RF"), c.seed);
  if (auto it = doc.find("map"); it != doc.end()) {
    check_keys(*it, "map", {"learner", "z", "ci_level", "floor_zero", "exclude_own_fold", "classes", "alpha",
                            "importance_repeats"});
    if (it->contains("learner")) c.map.spec = learner_from(it->at("learner"), c.seed);
    c.map.interval.z = get<double>(*it, "z", 1.64, "map");
    c.map.interval.ci_level = get<double>(*it, "ci_level", 0.90, "map");
    c.map.interval.floor_zero = get<bool>(*it, "floor_zero", true, "map");
    c.map.exclude_own_fold = get<bool>(*it, "exclude_own_fold", false, "map");
    c.map.classes = path_map(it->value("classes", json()), base, "map.classes");
    c.map.alpha = get<double>(*it, "alpha", 0.05, "map");
    c.map.importance_repeats = get<std::size_t>(*it, "importance_repeats", 5, "map");
    if (!(c.map.interval.z > 0.0)) fail(Errc::configuration, "map.z must be positive");
    if (!(c.map.alpha > 0.0 && c.map.alpha < 1.0)) fail(Errc::configuration, "map.alpha must be in (0, 1)");
    if (c.map.importance_repeats < 1) fail(Errc::configuration, "map.importance_repeats must be >= 1");
  }
  c.map.interval.threads = c.threads;

  if (auto it = doc.find("covariates"); it != doc.end()) {
    check_keys(*it, "covariates", {"bands", "dem", "external", "indices", "terrain", "target_grid",
                                   "resampling", "params"});
    auto& cov = c.covariates;
    cov.bands = path_map(it->value("bands", json()), base, "covariates.bands");
    if (it->contains("dem")) cov.dem = existing(base, it->at("dem").get<std::string>(), "covariates.dem");
    cov.external = path_map(it->value("external", json()), base, "covariates.external");
    cov.indices = get<std::vector<std::string>>(*it, "indices", {}, "covariates");
    cov.terrain = get<std::vector<std::string>>(*it, "terrain", {}, "covariates");
    if (it->contains("target_grid")) {
      cov.target_grid = existing(base, it->at("target_grid").get<std::string>(), "covariates.target_grid");
    }
    cov.resampling = resampling_from_string(get<std::string>(*it, "resampling", "bilinear", "covariates"));
    if (auto p = it->find("params"); p != it->end()) {
      check_keys(*p, "covariates.params", {"L", "C1", "C2"});
      cov.params.L = get<double>(*p, "L", cov.params.L, "covariates.params");
      cov.params.C1 = get<double>(*p, "C1", cov.params.C1, "covariates.params");
      cov.params.C2 = get<double>(*p, "C2", cov.params.C2, "covariates.params");
    }
    for (const auto& name : cov.indices) find_covariate(name);
    for (const auto& name : cov.terrain) terrain_attribute_from_string(name);
  }
  return c;
}

std::string config_hash(const json& document) {
  json copy = document;
  if (copy.is_object()) {
    copy.erase("threads");
    copy.erase("output");
  }
  const std::string text = copy.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace socmap::cli
