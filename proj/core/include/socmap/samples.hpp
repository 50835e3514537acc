#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socmap/matrix.hpp"

namespace socmap {

/// Missing covariate marker. Empty CSV cells and "NA" load as this value.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

enum class TransformKind { identity, log_anchored };

/// Log transform anchored at `offset`: y' = ln(y + offset). Forward needs
/// y > -offset.
struct TargetTransform {
  TransformKind kind = TransformKind::identity;
  double offset = 1.0;

  double forward(double y) const;
  double backward(double t) const;
  bool active() const { return kind != TransformKind::identity; }

  bool operator==(const TargetTransform&) const = default;
};

struct SampleRow {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double target = 0.0;
  std::vector<double> covariates;
};

/// Point samples with their covariate vectors. Construction validates the
/// invariants: unique ids and feature names, finite targets, and one
/// covariate per feature on every row.
class SampleTable {
 public:
  SampleTable() = default;
  SampleTable(std::vector<SampleRow> rows, std::vector<std::string> feature_names,
              std::string target_name, TargetTransform transform = {});

  std::size_t size() const noexcept { return rows_.size(); }
  std::size_t feature_count() const noexcept { return feature_names_.size(); }

  const std::vector<SampleRow>& rows() const noexcept { return rows_; }
  const SampleRow& row(std::size_t i) const { return rows_[i]; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::string& target_name() const noexcept { return target_name_; }
  const TargetTransform& transform() const noexcept { return transform_; }

  std::optional<std::size_t> feature_index(std::string_view name) const;

  std::vector<double> targets() const;
  Matrix features() const;
  Matrix features(std::span<const std::size_t> columns) const;

  SampleTable subset(std::span<const std::size_t> rows) const;
  SampleTable select_features(std::span<const std::size_t> columns) const;

 private:
  std::vector<SampleRow> rows_;
  std::vector<std::string> feature_names_;
  std::string target_name_;
  TargetTransform transform_;
};

struct SampleSchema {
  std::string id_column = "id";
  std::string x_column = "x";
  std::string y_column = "y";
  std::string target_column = "soc";
  /// Explicit covariate columns; empty means every remaining numeric column.
  std::vector<std::string> covariates;
};

SampleTable load_samples(const std::filesystem::path& path, const SampleSchema& schema = {});

/// Writes the table back as CSV (id, x, y, target, covariates...). Missing
/// covariates are written as "NA".
void write_samples(const SampleTable& table, const std::filesystem::path& path);

struct DescriptiveStats {
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double cv = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  double ks_p = 0.0;
};

DescriptiveStats describe(std::span<const double> values);
DescriptiveStats describe(const SampleTable& table);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against N(mean, sd^2) with the
/// asymptotic Kolmogorov distribution for the p-value.
KsResult ks_test_normal(std::span<const double> values, double mean = 0.0, double sd = 1.0);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

enum class TransformDirection { forward, backward };

SampleTable transform_target(const SampleTable& table, TransformDirection direction,
                             double offset = 1.0);

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;
  std::uint64_t seed = 0;

  std::vector<std::size_t> validation_rows(std::size_t fold) const;
  std::vector<std::size_t> training_rows(std::size_t fold) const;
  std::vector<std::size_t> fold_sizes() const;

  bool operator==(const FoldAssignment&) const = default;
};

FoldAssignment assign_folds(std::size_t n, std::size_t k, std::uint64_t seed);
inline FoldAssignment assign_folds(const SampleTable& table, std::size_t k, std::uint64_t seed) {
  return assign_folds(table.size(), k, seed);
}

/// Replaces each missing covariate with the median of its column's observed
/// values.
SampleTable impute_missing(const SampleTable& table);

}  // namespace socmap
