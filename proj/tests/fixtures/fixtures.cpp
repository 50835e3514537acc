#include "fixtures/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "socmap/random.hpp"

namespace fixtures {

using namespace socmap;

namespace {

std::string site_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%04zu", i + 1);
  return buf;
}

}  // namespace

SampleTable friedman1(std::size_t n, std::uint64_t seed, double noise_sd) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> e(0.0, noise_sd);
  std::vector<SampleRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    SampleRow r;
    r.id = site_id(i);
    r.covariates.resize(10);
    for (auto& v : r.covariates) v = u(rng);
    const auto& x = r.covariates;
    r.target = 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
               10.0 * x[3] + 5.0 * x[4] + e(rng);
    r.x = u(rng) * 1000.0;
    r.y = u(rng) * 1000.0;
    rows.push_back(std::move(r));
  }
  std::vector<std::string> names;
  for (int j = 1; j <= 10; ++j) names.push_back("x" + std::to_string(j));
  return SampleTable(std::move(rows), std::move(names), "target");
}

SampleTable planted(std::size_t n, std::size_t p, std::uint64_t seed, double noise_sd) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::normal_distribution<double> e(0.0, noise_sd);
  std::vector<SampleRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    SampleRow r;
    r.id = site_id(i);
    r.covariates.resize(p);
    for (auto& v : r.covariates) v = z(rng);
    r.target = 2.0 * r.covariates[0] - 3.0 * r.covariates[1] + e(rng);
    r.x = static_cast<double>(i);
    rows.push_back(std::move(r));
  }
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
  return SampleTable(std::move(rows), std::move(names), "target");
}

Landscape landscape(std::size_t n_samples, std::uint64_t seed, std::size_t size) {
  GridDef def{size, size, 500000.0, 4000000.0, 30.0, -9999.0};
  RasterGrid elev(def), ndvi(def), moist(def), noise(def), zones(def);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double s = static_cast<double>(size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double fr = static_cast<double>(r), fc = static_cast<double>(c);
      elev(r, c) = 100.0 + 2.0 * fc + 3.0 * fr + 5.0 * std::sin(fc / 3.0);
      ndvi(r, c) = 0.5 + 0.3 * std::sin(fr / 4.0) * std::cos(fc / 5.0);
      moist(r, c) = 0.2 + 0.6 * fr / s;
      noise(r, c) = u(rng);
      zones(r, c) = c < size / 3 ? 1.0 : (c < 2 * size / 3 ? 2.0 : 3.0);
    }
  }
  Landscape l;
  l.stack.add("ELEV", elev);
  l.stack.add("NDVI", ndvi);
  l.stack.add("MOIST", moist);
  l.stack.add("NOISE", noise);
  l.zones = zones;

  std::normal_distribution<double> e(0.0, 0.1);
  std::vector<SampleRow> rows;
  for (std::size_t i = 0; i < n_samples; ++i) {
    SampleRow row;
    row.id = site_id(i);
    row.x = def.xll + u(rng) * (def.x_max() - def.xll);
    row.y = def.yll + u(rng) * (def.y_max() - def.yll);
    const auto cell = *def.cell_of(row.x, row.y);
    for (const auto& [name, grid] : l.stack.layers()) row.covariates.push_back(grid(cell.first, cell.second));
    row.target = 0.5 + 2.0 * row.covariates[1] + 0.01 * (row.covariates[0] - 100.0) +
                 0.8 * row.covariates[2] + e(rng);
    rows.push_back(std::move(row));
  }
  l.samples = SampleTable(std::move(rows), l.stack.names(), "soc");
  return l;
}

void write_landscape(const Landscape& l, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "stack");
  write_samples(l.samples, dir / "samples.csv");
  write_stack(l.stack, dir / "stack" / "stack.json");
  write_ascii_grid(l.zones, dir / "zones.asc");
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("socmap_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
