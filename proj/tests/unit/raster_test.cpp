#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "fixtures/fixtures.hpp"
#include "socmap/error.hpp"
#include "socmap/raster/covariates.hpp"
#include "socmap/raster/grid.hpp"
#include "socmap/raster/terrain.hpp"

using namespace socmap;

namespace {

GridDef def_of(std::size_t nrows, std::size_t ncols, double cs = 10.0) {
  GridDef d;
  d.nrows = nrows;
  d.ncols = ncols;
  d.xll = 1000.0;
  d.yll = 2000.0;
  d.cellsize = cs;
  return d;
}

template <class F>
RasterGrid surface(const GridDef& d, F f) {
  RasterGrid g(d);
  for (std::size_t r = 0; r < d.nrows; ++r)
    for (std::size_t c = 0; c < d.ncols; ++c) g(r, c) = f(d.x_center(c), d.y_center(r));
  return g;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::state;
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(GridDef, CellCentresAndLookup) {
  const auto d = def_of(3, 4);
  EXPECT_DOUBLE_EQ(d.x_center(0), 1005.0);
  EXPECT_DOUBLE_EQ(d.y_center(0), 2025.0);
  EXPECT_EQ(d.cell_of(1005.0, 2025.0), std::make_pair(std::size_t{0}, std::size_t{0}));
  EXPECT_EQ(d.cell_of(1039.0, 2001.0), std::make_pair(std::size_t{2}, std::size_t{3}));
  EXPECT_FALSE(d.cell_of(999.0, 2010.0));
  EXPECT_FALSE(d.cell_of(1010.0, 2030.5));
  auto other = d;
  other.nodata = -1;
  EXPECT_TRUE(d.aligned_with(other));
  EXPECT_FALSE(d == other);
}

TEST(AsciiGrid, RoundTripKeepsValuesAndNodata) {
  auto g = surface(def_of(5, 7, 2.5), [](double x, double y) { return 0.125 * x - y / 3.0; });
  g(1, 2) = kNodata;
  const auto dir = fixtures::scratch_dir("ascii_roundtrip");
  write_ascii_grid(g, dir / "g.asc");
  const auto back = read_ascii_grid(dir / "g.asc");
  EXPECT_EQ(back.def(), g.def());
  EXPECT_TRUE(back.is_nodata(1, 2));
  EXPECT_EQ(back.valid_count(), 34u);
  EXPECT_TRUE(back == g);
}

TEST(AsciiGrid, ReadsCornerOrCentreOrigin) {
  const auto dir = fixtures::scratch_dir("ascii_header");
  write_text(dir / "c.asc", "ncols 2\nnrows 2\nxllcenter 5\nyllcenter 5\ncellsize 10\nNODATA_value -1\n1 2\n-1 4\n");
  const auto g = read_ascii_grid(dir / "c.asc");
  EXPECT_DOUBLE_EQ(g.def().xll, 0.0);
  EXPECT_DOUBLE_EQ(g.def().yll, 0.0);
  EXPECT_TRUE(g.is_nodata(1, 0));
  EXPECT_EQ(g(1, 1), 4.0);
}

TEST(AsciiGrid, MalformedInputsAreReported) {
  const auto dir = fixtures::scratch_dir("ascii_errors");
  const std::string head = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n";
  write_text(dir / "short.asc", head + "1 2 3\n");
  write_text(dir / "long.asc", head + "1 2 3 4 5\n");
  write_text(dir / "bad.asc", head + "1 x 3 4\n");
  write_text(dir / "nohead.asc", "ncols 2\nnrows 2\n1 2 3 4\n");
  write_text(dir / "zero.asc", "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 0\n1 2 3 4\n");
  EXPECT_EQ(code_of([&] { read_ascii_grid(dir / "short.asc"); }), Errc::truncation);
  EXPECT_EQ(code_of([&] { read_ascii_grid(dir / "long.asc"); }), Errc::truncation);
  EXPECT_EQ(code_of([&] { read_ascii_grid(dir / "bad.asc"); }), Errc::format);
  EXPECT_EQ(code_of([&] { read_ascii_grid(dir / "nohead.asc"); }), Errc::format);
  EXPECT_EQ(code_of([&] { read_ascii_grid(dir / "zero.asc"); }), Errc::format);
  EXPECT_EQ(code_of([&] { read_ascii_grid(dir / "absent.asc"); }), Errc::io);
}

TEST(RasterStack, EnforcesSharedGridAndUniqueNames) {
  RasterStack s;
  s.add("A", RasterGrid(def_of(3, 3)));
  EXPECT_EQ(code_of([&] { s.add("A", RasterGrid(def_of(3, 3))); }), Errc::duplicate);
  EXPECT_EQ(code_of([&] { s.add("B", RasterGrid(def_of(3, 4))); }), Errc::alignment);
  EXPECT_EQ(code_of([&] { s.at("C"); }), Errc::dependency);

  const auto dir = fixtures::scratch_dir("stack_roundtrip");
  s.add("B", surface(def_of(3, 3), [](double x, double) { return x; }));
  write_stack(s, dir / "stack.json");
  const auto back = load_stack(dir / "stack.json");
  EXPECT_EQ(back.names(), s.names());
  EXPECT_TRUE(back.at("B") == s.at("B"));
}

TEST(Resample, NearestCopiesContainingCell) {
  const auto src = surface(def_of(4, 4), [](double x, double y) { return x * 1000 + y; });
  GridDef fine = def_of(8, 8, 5.0);
  const auto out = resample(src, fine, Resampling::nearest);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(out(r, c), src(r / 2, c / 2));
}

TEST(Resample, BilinearReproducesPlanesInsideCentreHull) {
  auto plane = [](double x, double y) { return 3.0 + 0.5 * x - 0.25 * y; };
  const auto src = surface(def_of(6, 6), plane);
  GridDef target = def_of(9, 9, 4.0);
  target.xll += 6.0;
  target.yll += 6.0;
  const auto out = resample(src, target, Resampling::bilinear);
  const double lo_x = src.def().x_center(0), hi_x = src.def().x_center(5);
  const double lo_y = src.def().y_center(5), hi_y = src.def().y_center(0);
  std::size_t checked = 0;
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 9; ++c) {
      const double x = target.x_center(c), y = target.y_center(r);
      if (x < lo_x || x > hi_x || y < lo_y || y > hi_y) continue;
      EXPECT_NEAR(out(r, c), plane(x, y), 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 40u);
}

TEST(Resample, OutsideCellsAreNodataAndDisjointExtentFails) {
  const auto src = surface(def_of(2, 2), [](double, double) { return 1.0; });
  GridDef t = def_of(2, 4);
  t.xll += 10.0;
  const auto out = resample(src, t, Resampling::nearest);
  EXPECT_EQ(out(0, 0), 1.0);
  EXPECT_TRUE(out.is_nodata(0, 1));
  EXPECT_TRUE(out.is_nodata(1, 3));
  t.xll += 1000.0;
  EXPECT_EQ(code_of([&] { resample(src, t, Resampling::bilinear); }), Errc::extent);
  EXPECT_EQ(code_of([] { resampling_from_string("cubic"); }), Errc::configuration);
}

TEST(ExtractAtPoints, ReturnsLayerValuesOrMissing) {
  RasterStack s;
  s.add("X", surface(def_of(3, 3), [](double x, double) { return x; }));
  s.add("Y", surface(def_of(3, 3), [](double, double y) { return y; }));
  const std::vector<std::pair<double, double>> pts = {{1012.0, 2028.0}, {500.0, 2010.0}};
  const auto m = extract_at_points(s, pts);
  EXPECT_EQ(m(0, 0), 1015.0);
  EXPECT_EQ(m(0, 1), 2025.0);
  EXPECT_TRUE(std::isnan(m(1, 0)));
  EXPECT_TRUE(std::isnan(m(1, 1)));
}

TEST(Covariates, RegistryCoversTheCatalogue) {
  const auto& reg = covariate_registry();
  ASSERT_EQ(reg.size(), 105u);
  for (std::size_t i = 0; i < reg.size(); ++i) EXPECT_EQ(reg[i].row, static_cast<int>(i + 1));
  EXPECT_EQ(find_covariate("ndvi").name, "NDVI");
  EXPECT_EQ(find_covariate("Mrvbf").kind, LayerKind::external);
  EXPECT_EQ(find_covariate("GVI").kind, LayerKind::unsupported);
  EXPECT_EQ(code_of([] { find_covariate("NOPE"); }), Errc::registry);
  for (const auto& name : supported_indices()) EXPECT_EQ(find_covariate(name).kind, LayerKind::index);
}

TEST(Covariates, FormulasMatchHandValues) {
  const IndexParams p;
  auto eval = [&](const char* name, std::vector<double> b) { return evaluate_index(find_covariate(name), b, p); };
  EXPECT_DOUBLE_EQ(eval("NDVI", {0.6, 0.2}), 0.4 / 0.8);
  EXPECT_DOUBLE_EQ(eval("DVI", {0.6, 0.2}), 0.6 - 0.2);
  EXPECT_DOUBLE_EQ(eval("SAVI", {0.6, 0.2}), 1.5 * 0.4 / (0.8 + 0.5));
  EXPECT_DOUBLE_EQ(eval("EVI", {0.6, 0.2, 0.1}), 0.4 / (0.6 + 6.0 * 0.2 - 7.5 * 0.1 + 0.5));
  EXPECT_DOUBLE_EQ(eval("BI", {3.0, 4.0}), 5.0);
  EXPECT_DOUBLE_EQ(eval("IPVI", {0.6, 0.2}), 0.6 / 0.8);
  EXPECT_DOUBLE_EQ(eval("ARVI", {0.6, 0.2}), -0.18 + 1.17 * 0.5);
  const double t = 2.0 * 0.6 + 1.0;
  EXPECT_DOUBLE_EQ(eval("MSAVI", {0.6, 0.2}), 0.5 * (t - std::sqrt(t * t - 8.0 * 0.4)));
  EXPECT_TRUE(std::isnan(eval("NDVI", {0.2, -0.2})));
  EXPECT_TRUE(std::isnan(eval("NDVI", {NAN, 0.2})));
  IndexParams q;
  q.L = 1.0;
  EXPECT_DOUBLE_EQ(evaluate_index(find_covariate("SAVI"), std::vector<double>{0.6, 0.2}, q), 2.0 * 0.4 / 1.8);
}

TEST(Covariates, BandIndexWorksPerPixelAndReportsMissingInputs) {
  RasterStack s;
  auto nir = surface(def_of(3, 3), [](double x, double) { return (x - 1000.0) / 100.0; });
  nir(1, 1) = kNodata;
  s.add("NIR", nir);
  s.add("RED", RasterGrid(def_of(3, 3), 0.05));
  const auto g = band_index(s, "ndvi");
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      if (r == 1 && c == 1) {
        EXPECT_TRUE(g.is_nodata(r, c));
        continue;
      }
      const double n = nir(r, c);
      EXPECT_DOUBLE_EQ(g(r, c), (n - 0.05) / (n + 0.05));
    }
  }
  EXPECT_EQ(code_of([&] { band_index(s, "EVI"); }), Errc::dependency);
  EXPECT_EQ(code_of([&] { band_index(s, "MRVBF"); }), Errc::registry);
  EXPECT_EQ(code_of([&] { band_index(s, "GVI"); }), Errc::registry);
}

TEST(Terrain, PlaneSlopeAndAspect) {
  // z rises 1 unit per 10 m eastward and 2 units per 10 m northward.
  const auto dem = surface(def_of(7, 7), [](double x, double y) { return 0.1 * x + 0.2 * y; });
  const auto slope = terrain(dem, TerrainAttribute::slope);
  const auto aspect = terrain(dem, TerrainAttribute::aspect);
  const auto curv = terrain(dem, TerrainAttribute::plan_curvature);
  const double expect_slope = std::atan(std::hypot(0.1, 0.2)) * 180.0 / std::numbers::pi;
  double expect_aspect = std::atan2(-0.1, -0.2) * 180.0 / std::numbers::pi + 360.0;
  for (std::size_t r = 1; r < 6; ++r) {
    for (std::size_t c = 1; c < 6; ++c) {
      EXPECT_NEAR(slope(r, c), expect_slope, 1e-9);
      EXPECT_NEAR(aspect(r, c), expect_aspect, 1e-9);
      EXPECT_NEAR(curv(r, c), 0.0, 1e-12);
    }
  }
  const auto east = surface(def_of(5, 5), [](double x, double) { return -x; });
  EXPECT_NEAR(terrain(east, TerrainAttribute::aspect)(2, 2), 90.0, 1e-9);
  const auto flat = RasterGrid(def_of(4, 4), 3.0);
  EXPECT_EQ(terrain(flat, TerrainAttribute::aspect)(1, 1), -1.0);
  EXPECT_EQ(terrain(flat, TerrainAttribute::slope)(1, 1), 0.0);
}

TEST(Terrain, BowlHasPositiveCurvatureSignAndNodataPropagates) {
  auto dem = surface(def_of(9, 9), [](double x, double y) {
    const double dx = x - 1045.0, dy = y - 2045.0;
    return 0.01 * (dx * dx + dy * dy);
  });
  const auto curv = terrain(dem, TerrainAttribute::plan_curvature);
  const auto mirrored = terrain(surface(def_of(9, 9), [&](double x, double y) {
                                  const double dx = x - 1045.0, dy = y - 2045.0;
                                  return -0.01 * (dx * dx + dy * dy);
                                }),
                                TerrainAttribute::plan_curvature);
  EXPECT_NEAR(curv(2, 3), -mirrored(2, 3), 1e-12);
  EXPECT_NE(curv(2, 3), 0.0);
  dem(4, 4) = kNodata;
  const auto slope = terrain(dem, TerrainAttribute::slope);
  for (std::size_t r = 3; r <= 5; ++r)
    for (std::size_t c = 3; c <= 5; ++c) EXPECT_TRUE(slope.is_nodata(r, c));
  EXPECT_FALSE(slope.is_nodata(2, 2));
}

TEST(Terrain, RampFlowAccumulationAndWetness) {
  // Elevation rises eastward, so every cell drains due west.
  const auto dem = surface(def_of(4, 6), [](double x, double) { return 0.1 * x; });
  const auto rec = d8_receivers(dem);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(rec[r * 6], -1);
    for (std::size_t c = 1; c < 6; ++c) EXPECT_EQ(rec[r * 6 + c], static_cast<long>(r * 6 + c - 1));
  }
  const auto fa = terrain(dem, TerrainAttribute::flow_accumulation);
  const auto twi = terrain(dem, TerrainAttribute::twi);
  const double tan_slope = 0.1;
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      const double expect_fa = static_cast<double>(6 - c) * 100.0;
      EXPECT_DOUBLE_EQ(fa(r, c), expect_fa);
      if (c > 0 && c < 5 && r > 0 && r < 3) {
        EXPECT_NEAR(twi(r, c), std::log(std::max(expect_fa / 10.0, 10.0) / tan_slope), 1e-9);
      }
    }
  }
}

TEST(Terrain, NamesParseAndUnknownIsRejected) {
  for (auto a : {TerrainAttribute::slope, TerrainAttribute::aspect, TerrainAttribute::plan_curvature,
                 TerrainAttribute::flow_accumulation, TerrainAttribute::twi}) {
    EXPECT_EQ(terrain_attribute_from_string(to_string(a)), a);
  }
  EXPECT_EQ(terrain_attribute_from_string("SLOPE"), TerrainAttribute::slope);
  EXPECT_THROW(terrain_attribute_from_string("roughness"), Error);
}
