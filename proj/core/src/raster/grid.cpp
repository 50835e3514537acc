#include "socmap/raster/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "socmap/error.hpp"
#include "socmap/parallel.hpp"

namespace socmap {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string format(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::optional<std::pair<std::size_t, std::size_t>> GridDef::cell_of(double x, double y) const {
  if (!(x >= xll && x < x_max() && y > yll && y <= y_max())) return std::nullopt;
  auto col = static_cast<std::size_t>(std::floor((x - xll) / cellsize));
  auto row = static_cast<std::size_t>(std::floor((y_max() - y) / cellsize));
  col = std::min(col, ncols - 1);
  row = std::min(row, nrows - 1);
  return std::pair{row, col};
}

bool GridDef::aligned_with(const GridDef& o) const {
  return ncols == o.ncols && nrows == o.nrows && xll == o.xll && yll == o.yll &&
         cellsize == o.cellsize;
}

void validate(const GridDef& def) {
  if (def.ncols < 1 || def.nrows < 1) fail(Errc::shape, "grid needs at least one row and column");
  if (!(def.cellsize > 0.0) || !std::isfinite(def.cellsize)) {
    fail(Errc::format, "cellsize must be positive, got " + format(def.cellsize));
  }
  if (!std::isfinite(def.xll) || !std::isfinite(def.yll)) fail(Errc::format, "grid origin must be finite");
}

RasterGrid::RasterGrid(GridDef def, double fill) : def_(def), values_(def.cells(), fill) {
  validate(def_);
}

RasterGrid::RasterGrid(GridDef def, std::vector<double> values)
    : def_(def), values_(std::move(values)) {
  validate(def_);
  if (values_.size() != def_.cells()) {
    fail(Errc::shape, "grid of " + std::to_string(def_.nrows) + "x" + std::to_string(def_.ncols) +
                          " needs " + std::to_string(def_.cells()) + " values, got " +
                          std::to_string(values_.size()));
  }
  for (auto& v : values_) {
    if (!std::isfinite(v)) v = kNodata;
  }
}

bool RasterGrid::is_nodata(std::size_t r, std::size_t c) const { return std::isnan((*this)(r, c)); }

std::size_t RasterGrid::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return !std::isnan(v); }));
}

bool RasterGrid::operator==(const RasterGrid& other) const {
  if (!(def_ == other.def_) || values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double a = values_[i];
    const double b = other.values_[i];
    if (std::isnan(a) != std::isnan(b)) return false;
    if (!std::isnan(a) && a != b) return false;
  }
  return true;
}

void RasterStack::add(std::string name, RasterGrid grid) {
  if (find(name)) fail(Errc::duplicate, "layer \"" + name + "\" already in stack");
  if (!layers_.empty() && !grid.def().aligned_with(def())) {
    fail(Errc::alignment, "layer \"" + name + "\" is not on the stack's grid");
  }
  layers_.emplace_back(std::move(name), std::move(grid));
}

const GridDef& RasterStack::def() const {
  if (layers_.empty()) fail(Errc::configuration, "stack has no layers");
  return layers_.front().second.def();
}

const RasterGrid* RasterStack::find(std::string_view name) const {
  for (const auto& [n, g] : layers_) {
    if (n == name) return &g;
  }
  return nullptr;
}

const RasterGrid& RasterStack::at(std::string_view name) const {
  if (const auto* g = find(name)) return *g;
  fail(Errc::dependency, "stack has no layer \"" + std::string(name) + "\"");
}

std::vector<std::string> RasterStack::names() const {
  std::vector<std::string> out;
  for (const auto& [n, g] : layers_) out.push_back(n);
  return out;
}

RasterGrid read_ascii_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open grid " + path.string());
  const std::string where = path.string() + ": ";

  GridDef def;
  bool have[5] = {false, false, false, false, false};
  bool x_center = false, y_center = false;
  std::string line;
  std::size_t line_no = 0;
  std::string pending;  // first data line, already consumed
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string key, value, extra;
    if (!(ss >> key)) continue;
    if (!std::isalpha(static_cast<unsigned char>(key.front()))) {
      pending = line;
      break;
    }
    if (!(ss >> value) || (ss >> extra)) {
      fail(Errc::format, where + "malformed header at line " + std::to_string(line_no) + ": \"" + line + "\"");
    }
    double v = 0.0;
    if (!parse_double(value, v)) {
      fail(Errc::format, where + "non-numeric header value at line " + std::to_string(line_no));
    }
    const auto k = lower(key);
    auto count = [&](double d, const char* name) {
      if (!(d >= 1.0) || d != std::floor(d)) {
        fail(Errc::format, where + name + " must be a positive integer at line " + std::to_string(line_no));
      }
      return static_cast<std::size_t>(d);
    };
    if (k == "ncols") {
      def.ncols = count(v, "ncols");
      have[0] = true;
    } else if (k == "nrows") {
      def.nrows = count(v, "nrows");
      have[1] = true;
    } else if (k == "xllcorner" || k == "xllcenter") {
      def.xll = v;
      x_center = k == "xllcenter";
      have[2] = true;
    } else if (k == "yllcorner" || k == "yllcenter") {
      def.yll = v;
      y_center = k == "yllcenter";
      have[3] = true;
    } else if (k == "cellsize") {
      def.cellsize = v;
      have[4] = true;
    } else if (k == "nodata_value") {
      def.nodata = v;
    } else {
      fail(Errc::format, where + "unknown header key \"" + key + "\" at line " + std::to_string(line_no));
    }
  }
  const char* names[5] = {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize"};
  for (int i = 0; i < 5; ++i) {
    if (!have[i]) {
      fail(Errc::format, where + "header is missing " + names[i] + " (data starts at line " +
                             std::to_string(line_no) + ")");
    }
  }
  if (!(def.cellsize > 0.0)) fail(Errc::format, where + "cellsize must be positive");
  if (x_center) def.xll -= def.cellsize / 2.0;
  if (y_center) def.yll -= def.cellsize / 2.0;

  std::vector<double> values;
  values.reserve(def.cells());
  auto consume = [&](const std::string& text) {
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
      while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
      if (p == end) break;
      const char* start = p;
      while (p < end && !std::isspace(static_cast<unsigned char>(*p))) ++p;
      double v = 0.0;
      if (!parse_double(std::string_view(start, static_cast<std::size_t>(p - start)), v)) {
        fail(Errc::format, where + "bad value \"" + std::string(start, p) + "\" at line " +
                               std::to_string(line_no));
      }
      if (values.size() == def.cells()) {
        fail(Errc::truncation, where + "more than " + std::to_string(def.cells()) + " values");
      }
      values.push_back(v == def.nodata ? kNodata : v);
    }
  };
  if (!pending.empty()) consume(pending);
  while (std::getline(in, line)) {
    ++line_no;
    consume(line);
  }
  if (values.size() != def.cells()) {
    fail(Errc::truncation, where + "expected " + std::to_string(def.cells()) + " values, found " +
                               std::to_string(values.size()));
  }
  return RasterGrid(def, std::move(values));
}

void write_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write grid " + path.string());
  const auto& d = grid.def();
  out << "ncols " << d.ncols << "\nnrows " << d.nrows << "\nxllcorner " << format(d.xll)
      << "\nyllcorner " << format(d.yll) << "\ncellsize " << format(d.cellsize) << "\nNODATA_value "
      << format(d.nodata) << '\n';
  std::string row;
  for (std::size_t r = 0; r < d.nrows; ++r) {
    row.clear();
    for (std::size_t c = 0; c < d.ncols; ++c) {
      if (c) row.push_back(' ');
      row += format(grid.is_nodata(r, c) ? d.nodata : grid(r, c));
    }
    row.push_back('\n');
    out << row;
  }
  if (!out) fail(Errc::io, "failed writing grid " + path.string());
}

RasterStack load_stack(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) fail(Errc::io, "cannot open stack manifest " + manifest.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, manifest.string() + ": " + e.what());
  }
  if (!j.is_object() || j.empty()) {
    fail(Errc::format, manifest.string() + " must be a non-empty object of layer name -> path");
  }
  RasterStack stack;
  for (const auto& [name, value] : j.items()) {
    if (!value.is_string()) fail(Errc::format, "layer \"" + name + "\" path must be a string");
    std::filesystem::path p = value.get<std::string>();
    if (p.is_relative()) p = manifest.parent_path() / p;
    stack.add(name, read_ascii_grid(p));
  }
  return stack;
}

void write_stack(const RasterStack& stack, const std::filesystem::path& manifest) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, grid] : stack.layers()) {
    const std::string file = name + ".asc";
    write_ascii_grid(grid, manifest.parent_path() / file);
    j[name] = file;
  }
  std::ofstream out(manifest);
  if (!out) fail(Errc::io, "cannot write " + manifest.string());
  out << j.dump(2) << '\n';
}

Resampling resampling_from_string(std::string_view name) {
  const auto n = lower(std::string(name));
  if (n == "nearest") return Resampling::nearest;
  if (n == "bilinear") return Resampling::bilinear;
  fail(Errc::configuration, "unknown resampling method \"" + std::string(name) +
                                "\" (expected nearest or bilinear)");
}

RasterGrid resample(const RasterGrid& src, const GridDef& target, Resampling method) {
  validate(target);
  const auto& s = src.def();
  const double tx0 = target.xll, tx1 = target.x_max(), ty0 = target.yll, ty1 = target.y_max();
  if (!(tx0 < s.x_max() && s.xll < tx1 && ty0 < s.y_max() && s.yll < ty1)) {
    fail(Errc::extent, "target grid does not overlap the source extent");
  }

  RasterGrid out(target, kNodata);
  parallel_for(target.nrows, [&](std::size_t r) {
    const double y = target.y_center(r);
    for (std::size_t c = 0; c < target.ncols; ++c) {
      const double x = target.x_center(c);
      const auto cell = s.cell_of(x, y);
      if (!cell) continue;
      if (method == Resampling::nearest) {
        out(r, c) = src(cell->first, cell->second);
        continue;
      }
      // Fractional position between source cell centres, clamped at edges.
      const double fc = std::clamp((x - s.xll) / s.cellsize - 0.5, 0.0, double(s.ncols - 1));
      const double fr = std::clamp((s.y_max() - y) / s.cellsize - 0.5, 0.0, double(s.nrows - 1));
      const auto c0 = static_cast<std::size_t>(std::floor(fc));
      const auto r0 = static_cast<std::size_t>(std::floor(fr));
      const std::size_t c1 = std::min(c0 + 1, s.ncols - 1);
      const std::size_t r1 = std::min(r0 + 1, s.nrows - 1);
      const double wx = fc - static_cast<double>(c0);
      const double wy = fr - static_cast<double>(r0);
      const double v00 = src(r0, c0), v01 = src(r0, c1), v10 = src(r1, c0), v11 = src(r1, c1);
      if (!std::isnan(v00) && !std::isnan(v01) && !std::isnan(v10) && !std::isnan(v11)) {
        out(r, c) = (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01) + wy * ((1.0 - wx) * v10 + wx * v11);
        continue;
      }
      // Nearest valid of the four neighbours; earlier corner wins ties.
      const double corners[4][3] = {{v00, wx, wy}, {v01, 1.0 - wx, wy},
                                    {v10, wx, 1.0 - wy}, {v11, 1.0 - wx, 1.0 - wy}};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& k : corners) {
        if (std::isnan(k[0])) continue;
        const double d = k[1] * k[1] + k[2] * k[2];
        if (d < best) {
          best = d;
          out(r, c) = k[0];
        }
      }
    }
  });
  return out;
}

Matrix extract_at_points(const RasterStack& stack,
                         std::span<const std::pair<double, double>> points) {
  if (stack.empty()) fail(Errc::configuration, "cannot extract from an empty stack");
  const auto& def = stack.def();
  Matrix out(points.size(), stack.size(), kNodata);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto cell = def.cell_of(points[i].first, points[i].second);
    if (!cell) continue;
    for (std::size_t l = 0; l < stack.size(); ++l) {
      out(i, l) = stack.layers()[l].second(cell->first, cell->second);
    }
  }
  return out;
}

}  // namespace socmap
