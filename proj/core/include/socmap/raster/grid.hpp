#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "socmap/matrix.hpp"

namespace socmap {

/// Georeferencing of a north-up grid. Row 0 is the northern edge.
struct GridDef {
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  double xll = 0.0;
  double yll = 0.0;
  double cellsize = 1.0;
  double nodata = -9999.0;

  std::size_t cells() const { return ncols * nrows; }
  double x_max() const { return xll + static_cast<double>(ncols) * cellsize; }
  double y_max() const { return yll + static_cast<double>(nrows) * cellsize; }
  double x_center(std::size_t col) const { return xll + (static_cast<double>(col) + 0.5) * cellsize; }
  double y_center(std::size_t row) const {
    return y_max() - (static_cast<double>(row) + 0.5) * cellsize;
  }
  /// Cell containing (x, y), or nothing outside the extent.
  std::optional<std::pair<std::size_t, std::size_t>> cell_of(double x, double y) const;

  /// Same shape and georeferencing; the nodata sentinel is not compared.
  bool aligned_with(const GridDef& other) const;
  bool operator==(const GridDef&) const = default;
};

void validate(const GridDef& def);

/// Row-major cell values; nodata cells hold NaN in memory and the sentinel
/// only on disk.
class RasterGrid {
 public:
  RasterGrid() = default;
  explicit RasterGrid(GridDef def, double fill = 0.0);
  RasterGrid(GridDef def, std::vector<double> values);

  const GridDef& def() const noexcept { return def_; }
  std::size_t rows() const noexcept { return def_.nrows; }
  std::size_t cols() const noexcept { return def_.ncols; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * def_.ncols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * def_.ncols + c]; }
  bool is_nodata(std::size_t r, std::size_t c) const;

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::size_t valid_count() const;

  bool operator==(const RasterGrid& other) const;

 private:
  GridDef def_;
  std::vector<double> values_;
};

inline constexpr double kNodata = std::numeric_limits<double>::quiet_NaN();

/// Named layers on one shared grid, in insertion order.
class RasterStack {
 public:
  void add(std::string name, RasterGrid grid);

  bool empty() const noexcept { return layers_.empty(); }
  std::size_t size() const noexcept { return layers_.size(); }
  const GridDef& def() const;
  const RasterGrid* find(std::string_view name) const;
  const RasterGrid& at(std::string_view name) const;
  std::vector<std::string> names() const;
  const std::vector<std::pair<std::string, RasterGrid>>& layers() const noexcept { return layers_; }

 private:
  std::vector<std::pair<std::string, RasterGrid>> layers_;
};

RasterGrid read_ascii_grid(const std::filesystem::path& path);
void write_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path);

/// Manifest: JSON object of layer name -> grid path. Relative paths resolve
/// against the manifest's directory.
RasterStack load_stack(const std::filesystem::path& manifest);
void write_stack(const RasterStack& stack, const std::filesystem::path& manifest);

enum class Resampling { nearest, bilinear };
Resampling resampling_from_string(std::string_view name);

RasterGrid resample(const RasterGrid& src, const GridDef& target, Resampling method);

/// Nearest-cell value of every layer at each point; rows outside the extent
/// are all missing (NaN). Columns follow the stack's layer order.
Matrix extract_at_points(const RasterStack& stack, std::span<const std::pair<double, double>> points);

}  // namespace socmap
