#include "socmap/raster/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "socmap/error.hpp"
#include "socmap/parallel.hpp"

namespace socmap {

namespace {

// Reflect an index into [0, n): -1 -> 1, n -> n - 2.
std::size_t reflect(long i, std::size_t n) {
  const long last = static_cast<long>(n) - 1;
  if (i < 0) i = -i;
  if (i > last) i = 2 * last - i;
  return static_cast<std::size_t>(std::clamp(i, 0L, last));
}

struct Window {
  // z[0..8]: NW N NE / W C E / SW S SE
  double z[9];
  bool valid;
};

Window window(const RasterGrid& dem, std::size_t r, std::size_t c) {
  Window w{};
  w.valid = true;
  int k = 0;
  for (long dr = -1; dr <= 1; ++dr) {
    for (long dc = -1; dc <= 1; ++dc) {
      const double v = dem(reflect(static_cast<long>(r) + dr, dem.rows()),
                           reflect(static_cast<long>(c) + dc, dem.cols()));
      w.z[k++] = v;
      w.valid = w.valid && !std::isnan(v);
    }
  }
  return w;
}

// Gradient in map orientation: +x east, +y north.
void horn(const Window& w, double cs, double& dzdx, double& dzdy) {
  const double* z = w.z;
  dzdx = ((z[2] + 2.0 * z[5] + z[8]) - (z[0] + 2.0 * z[3] + z[6])) / (8.0 * cs);
  dzdy = ((z[0] + 2.0 * z[1] + z[2]) - (z[6] + 2.0 * z[7] + z[8])) / (8.0 * cs);
}

double slope_radians(const Window& w, double cs) {
  double gx = 0.0, gy = 0.0;
  horn(w, cs, gx, gy);
  return std::atan(std::hypot(gx, gy));
}

double aspect_degrees(const Window& w, double cs) {
  double gx = 0.0, gy = 0.0;
  horn(w, cs, gx, gy);
  if (gx == 0.0 && gy == 0.0) return -1.0;
  double deg = std::atan2(-gx, -gy) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  return deg;
}

double plan_curvature(const Window& w, double cs) {
  const double* z = w.z;
  const double l2 = cs * cs;
  const double d = ((z[3] + z[5]) / 2.0 - z[4]) / l2;
  const double e = ((z[1] + z[7]) / 2.0 - z[4]) / l2;
  const double f = (-z[0] + z[2] + z[6] - z[8]) / (4.0 * l2);
  const double g = (-z[3] + z[5]) / (2.0 * cs);
  const double h = (z[1] - z[7]) / (2.0 * cs);
  const double q = g * g + h * h;
  if (q == 0.0) return 0.0;
  return 2.0 * (d * h * h + e * g * g - f * g * h) / q;
}

RasterGrid flow_accumulation(const RasterGrid& dem) {
  const auto receivers = d8_receivers(dem);
  const std::size_t n = receivers.size();
  std::vector<std::size_t> indegree(n, 0);
  for (auto r : receivers) {
    if (r >= 0) ++indegree[static_cast<std::size_t>(r)];
  }
  std::vector<double> count(n, 1.0);
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) queue.push_back(i);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto i = queue[head];
    const long r = receivers[i];
    if (r < 0) continue;
    const auto j = static_cast<std::size_t>(r);
    count[j] += count[i];
    if (--indegree[j] == 0) queue.push_back(j);
  }
  const double area = dem.def().cellsize * dem.def().cellsize;
  RasterGrid out(dem.def(), kNodata);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isnan(dem.values()[i])) out.values()[i] = count[i] * area;
  }
  return out;
}

}  // namespace

TerrainAttribute terrain_attribute_from_string(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "slope") return TerrainAttribute::slope;
  if (n == "aspect") return TerrainAttribute::aspect;
  if (n == "plan_curvature") return TerrainAttribute::plan_curvature;
  if (n == "flow_accumulation") return TerrainAttribute::flow_accumulation;
  if (n == "twi") return TerrainAttribute::twi;
  fail(Errc::registry, "unknown terrain attribute \"" + std::string(name) +
                           "\"; supported: slope, aspect, plan_curvature, flow_accumulation, twi");
}

std::string_view to_string(TerrainAttribute attribute) {
  switch (attribute) {
    case TerrainAttribute::slope: return "slope";
    case TerrainAttribute::aspect: return "aspect";
    case TerrainAttribute::plan_curvature: return "plan_curvature";
    case TerrainAttribute::flow_accumulation: return "flow_accumulation";
    case TerrainAttribute::twi: return "twi";
  }
  return "?";
}

std::vector<long> d8_receivers(const RasterGrid& dem) {
  const std::size_t rows = dem.rows(), cols = dem.cols();
  const double cs = dem.def().cellsize;
  std::vector<long> out(rows * cols, -1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double z = dem(r, c);
      if (std::isnan(z)) continue;
      double best = 0.0;
      long target = -1;
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const long rr = static_cast<long>(r) + dr;
          const long cc = static_cast<long>(c) + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<long>(rows) || cc >= static_cast<long>(cols)) continue;
          const double zn = dem(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
          if (std::isnan(zn)) continue;
          const double dist = (dr != 0 && dc != 0) ? cs * std::numbers::sqrt2 : cs;
          const double drop = (z - zn) / dist;
          if (drop > best) {
            best = drop;
            target = rr * static_cast<long>(cols) + cc;
          }
        }
      }
      out[r * cols + c] = target;
    }
  }
  return out;
}

RasterGrid terrain(const RasterGrid& dem, TerrainAttribute attribute) {
  if (dem.rows() < 3 || dem.cols() < 3) fail(Errc::shape, "terrain attributes need a DEM of at least 3x3 cells");
  if (attribute == TerrainAttribute::flow_accumulation) return flow_accumulation(dem);

  const double cs = dem.def().cellsize;
  RasterGrid fa;
  if (attribute == TerrainAttribute::twi) fa = flow_accumulation(dem);

  RasterGrid out(dem.def(), kNodata);
  parallel_for(dem.rows(), [&](std::size_t r) {
    for (std::size_t c = 0; c < dem.cols(); ++c) {
      const auto w = window(dem, r, c);
      if (!w.valid) continue;
      switch (attribute) {
        case TerrainAttribute::slope:
          out(r, c) = slope_radians(w, cs) * 180.0 / std::numbers::pi;
          break;
        case TerrainAttribute::aspect:
          out(r, c) = aspect_degrees(w, cs);
          break;
        case TerrainAttribute::plan_curvature:
          out(r, c) = plan_curvature(w, cs);
          break;
        case TerrainAttribute::twi: {
          const double sca = std::max(fa(r, c) / cs, cs);
          const double tan_slope = std::max(std::tan(slope_radians(w, cs)), 0.001);
          out(r, c) = std::log(sca / tan_slope);
          break;
        }
        case TerrainAttribute::flow_accumulation:
          break;
      }
    }
  });
  return out;
}

}  // namespace socmap
