#include "socmap/samples.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "socmap/error.hpp"
#include "socmap/random.hpp"

namespace socmap {

double TargetTransform::forward(double y) const {
  if (kind == TransformKind::identity) return y;
  return std::log(y + offset);
}

double TargetTransform::backward(double t) const {
  if (kind == TransformKind::identity) return t;
  return std::exp(t) - offset;
}

SampleTable::SampleTable(std::vector<SampleRow> rows, std::vector<std::string> feature_names,
                         std::string target_name, TargetTransform transform)
    : rows_(std::move(rows)),
      feature_names_(std::move(feature_names)),
      target_name_(std::move(target_name)),
      transform_(transform) {
  std::unordered_set<std::string> names;
  for (const auto& name : feature_names_) {
    if (!names.insert(name).second) fail(Errc::duplicate, "duplicate feature name \"" + name + "\"");
  }
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!ids.insert(r.id).second) fail(Errc::duplicate, "duplicate site id \"" + r.id + "\"");
    if (!std::isfinite(r.target)) {
      fail(Errc::data, "non-finite target at site \"" + r.id + "\"");
    }
    if (r.covariates.size() != feature_names_.size()) {
      fail(Errc::shape, "site \"" + r.id + "\" has " + std::to_string(r.covariates.size()) +
                            " covariates, expected " + std::to_string(feature_names_.size()));
    }
  }
}

std::optional<std::size_t> SampleTable::feature_index(std::string_view name) const {
  auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
  if (it == feature_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names_.begin());
}

std::vector<double> SampleTable::targets() const {
  std::vector<double> out(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out[i] = rows_[i].target;
  return out;
}

Matrix SampleTable::features() const {
  std::vector<std::size_t> all(feature_names_.size());
  std::iota(all.begin(), all.end(), 0);
  return features(all);
}

Matrix SampleTable::features(std::span<const std::size_t> columns) const {
  Matrix out(rows_.size(), columns.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j) out(r, j) = rows_[r].covariates[columns[j]];
  }
  return out;
}

SampleTable SampleTable::subset(std::span<const std::size_t> rows) const {
  std::vector<SampleRow> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(rows_.at(r));
  return SampleTable(std::move(out), feature_names_, target_name_, transform_);
}

SampleTable SampleTable::select_features(std::span<const std::size_t> columns) const {
  std::vector<std::string> names;
  for (auto c : columns) names.push_back(feature_names_.at(c));
  std::vector<SampleRow> out = rows_;
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::vector<double> cov(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) cov[j] = rows_[r].covariates[columns[j]];
    out[r].covariates = std::move(cov);
  }
  return SampleTable(std::move(out), std::move(names), target_name_, transform_);
}

// --- CSV -------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

// Comma-separated with optional double-quoted fields ("" escapes a quote).
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

bool is_missing_cell(const std::string& cell) { return cell.empty() || cell == "NA"; }

std::optional<double> parse_double(const std::string& cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

}  // namespace

SampleTable load_samples(const std::filesystem::path& path, const SampleSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open samples file " + path.string());

  std::string line;
  if (!std::getline(in, line)) fail(Errc::schema, "samples file " + path.string() + " is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);

  std::unordered_map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!col_index.emplace(header[i], i).second) {
      fail(Errc::schema, "duplicate column \"" + header[i] + "\" in " + path.string());
    }
  }
  auto require = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end()) fail(Errc::schema, "missing column \"" + name + "\" in " + path.string());
    return it->second;
  };
  const std::size_t id_col = require(schema.id_column);
  const std::size_t x_col = require(schema.x_column);
  const std::size_t y_col = require(schema.y_column);
  const std::size_t t_col = require(schema.target_column);

  std::vector<std::vector<std::string>> records;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      fail(Errc::parse, "row " + std::to_string(records.size() + 1) + " has " +
                            std::to_string(cells.size()) + " fields, header has " +
                            std::to_string(header.size()));
    }
    records.push_back(std::move(cells));
  }

  std::vector<std::size_t> cov_cols;
  if (!schema.covariates.empty()) {
    for (const auto& name : schema.covariates) cov_cols.push_back(require(name));
  } else {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == id_col || c == x_col || c == y_col || c == t_col) continue;
      const bool numeric = std::all_of(records.begin(), records.end(), [&](const auto& rec) {
        return is_missing_cell(rec[c]) || parse_double(rec[c]).has_value();
      });
      if (numeric) cov_cols.push_back(c);
    }
  }

  std::vector<std::string> names;
  for (auto c : cov_cols) names.push_back(header[c]);

  auto numeric_cell = [&](std::size_t row, std::size_t col, const char* what) {
    auto v = parse_double(records[row][col]);
    if (!v || !std::isfinite(*v)) {
      fail(Errc::parse, std::string("non-numeric ") + what + " \"" + records[row][col] + "\" at row " +
                            std::to_string(row + 1) + " (line " + std::to_string(row + 2) + ")");
    }
    return *v;
  };

  std::vector<SampleRow> rows;
  rows.reserve(records.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < records.size(); ++r) {
    SampleRow row;
    row.id = records[r][id_col];
    if (!seen.insert(row.id).second) {
      fail(Errc::duplicate, "duplicate site id \"" + row.id + "\" at row " + std::to_string(r + 1));
    }
    row.x = numeric_cell(r, x_col, "x");
    row.y = numeric_cell(r, y_col, "y");
    row.target = numeric_cell(r, t_col, "target");
    row.covariates.reserve(cov_cols.size());
    for (auto c : cov_cols) {
      const auto& cell = records[r][c];
      if (is_missing_cell(cell)) {
        row.covariates.push_back(kMissing);
      } else {
        auto v = parse_double(cell);
        if (!v) {
          fail(Errc::parse, "non-numeric covariate \"" + cell + "\" in column \"" + header[c] +
                                "\" at row " + std::to_string(r + 1));
        }
        row.covariates.push_back(*v);
      }
    }
    rows.push_back(std::move(row));
  }
  return SampleTable(std::move(rows), std::move(names), schema.target_column);
}

namespace {
std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}
}  // namespace

void write_samples(const SampleTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out << "id,x,y," << table.target_name();
  for (const auto& name : table.feature_names()) out << ',' << name;
  out << '\n';
  for (const auto& r : table.rows()) {
    out << r.id << ',' << format_double(r.x) << ',' << format_double(r.y) << ','
        << format_double(r.target);
    for (double v : r.covariates) out << ',' << (is_missing(v) ? std::string("NA") : format_double(v));
    out << '\n';
  }
}

// --- transform, folds, imputation -----------------------------------------

SampleTable transform_target(const SampleTable& table, TransformDirection direction, double offset) {
  std::vector<SampleRow> rows = table.rows();
  TargetTransform tag = table.transform();
  if (direction == TransformDirection::forward) {
    if (tag.active()) fail(Errc::state, "target is already transformed");
    tag = TargetTransform{TransformKind::log_anchored, offset};
    for (auto& r : rows) {
      if (!(r.target > -offset)) {
        fail(Errc::domain, "target " + format_double(r.target) + " at site \"" + r.id +
                               "\" is outside the log-transform domain (> " + format_double(-offset) + ")");
      }
      r.target = tag.forward(r.target);
    }
  } else {
    if (!tag.active()) fail(Errc::state, "target is not transformed; nothing to invert");
    for (auto& r : rows) r.target = tag.backward(r.target);
    tag = TargetTransform{};
  }
  return SampleTable(std::move(rows), table.feature_names(), table.target_name(), tag);
}

std::vector<std::size_t> FoldAssignment::validation_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::training_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : fold_of) ++sizes[f];
  return sizes;
}

FoldAssignment assign_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(Errc::configuration, "fold count must be at least 2, got " + std::to_string(k));
  if (k > n) {
    fail(Errc::configuration,
         "fold count " + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  FoldAssignment folds{k, std::vector<std::size_t>(n), seed};
  for (std::size_t i = 0; i < n; ++i) folds.fold_of[perm[i]] = i % k;
  return folds;
}

SampleTable impute_missing(const SampleTable& table) {
  std::vector<SampleRow> rows = table.rows();
  for (std::size_t c = 0; c < table.feature_count(); ++c) {
    std::vector<double> observed;
    bool any_missing = false;
    for (const auto& r : rows) {
      if (is_missing(r.covariates[c])) {
        any_missing = true;
      } else {
        observed.push_back(r.covariates[c]);
      }
    }
    if (!any_missing) continue;
    if (observed.empty()) {
      fail(Errc::imputation, "column \"" + table.feature_names()[c] + "\" has no observed values");
    }
    std::sort(observed.begin(), observed.end());
    const std::size_t m = observed.size();
    const double median = m % 2 == 1 ? observed[m / 2] : 0.5 * (observed[m / 2 - 1] + observed[m / 2]);
    for (auto& r : rows) {
      if (is_missing(r.covariates[c])) r.covariates[c] = median;
    }
  }
  return SampleTable(std::move(rows), table.feature_names(), table.target_name(), table.transform());
}

}  // namespace socmap
