#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "socmap/crossval.hpp"
#include "socmap/gasel.hpp"
#include "socmap/learners/spec.hpp"
#include "socmap/mapping.hpp"
#include "socmap/raster/covariates.hpp"
#include "socmap/raster/grid.hpp"
#include "socmap/samples.hpp"

namespace socmap::cli {

struct SelectConfig {
  GaConfig ga;
  double holdout_fraction = 0.2;
};

struct MapConfig {
  LearnerSpec spec = default_spec(Algorithm::RF);
  IntervalOptions interval;
  bool exclude_own_fold = false;
  std::vector<std::pair<std::string, std::filesystem::path>> classes;
  double alpha = 0.05;
  std::size_t importance_repeats = 5;
};

struct CovariatesConfig {
  std::vector<std::pair<std::string, std::filesystem::path>> bands;
  std::optional<std::filesystem::path> dem;
  std::vector<std::pair<std::string, std::filesystem::path>> external;
  std::vector<std::string> indices;
  std::vector<std::string> terrain;
  std::optional<std::filesystem::path> target_grid;
  Resampling resampling = Resampling::bilinear;
  IndexParams params;
};

/// Parsed run configuration. Relative paths are resolved against the config
/// file's directory.
struct RunConfig {
  nlohmann::json document;  // merged config, after command-line overrides
  std::filesystem::path samples;
  std::filesystem::path stack;
  std::filesystem::path output = "socmap_out";
  std::optional<std::filesystem::path> mask;
  SampleSchema schema;
  std::uint64_t seed = 0;
  int threads = 0;
  bool log_transform = true;
  double offset = 1.0;
  bool impute = true;
  std::size_t folds = 10;
  std::vector<LearnerSpec> learners;
  bool baseline = true;
  CvOptions cv;
  SelectConfig select;
  MapConfig map;
  CovariatesConfig covariates;
};

nlohmann::json read_config_file(const std::filesystem::path& path);

/// Applies "a.b.c=value" to the document. The value is parsed as JSON when it
/// is valid JSON, otherwise taken as a string.
void apply_override(nlohmann::json& document, const std::string& assignment);

/// Validates and converts the document. Throws socmap::Error on any problem.
RunConfig parse_config(const nlohmann::json& document, const std::filesystem::path& base_dir);

/// FNV-1a over the canonical dump of the document without "threads" and
/// "output", which do not change results.
std::string config_hash(const nlohmann::json& document);

}  // namespace socmap::cli
