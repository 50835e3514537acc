#include "socmap/raster/covariates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "socmap/error.hpp"
#include "socmap/parallel.hpp"

namespace socmap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(double num, double den) { return std::abs(den) < 1e-12 ? kNaN : num / den; }

using B = std::span<const double>;
using P = const IndexParams&;

// Argument order of each formula follows CovariateEntry::inputs.
double wbdi(B b, P) { return ratio(b[0], b[1]); }
double arvi(B b, P) { return -0.18 + 1.17 * ratio(b[0] - b[1], b[0] + b[1]); }
double bwdrvi(B b, P) { return ratio(0.1 * b[0] - b[1], 0.1 * b[0] + b[1]); }
double brightness(B b, P) { return std::sqrt(b[0] * b[0] + b[1] * b[1]); }
double difference(B b, P) { return b[0] - b[1]; }
double simple_ratio(B b, P) { return ratio(b[0], b[1]); }
double normalized_difference(B b, P) { return ratio(b[0] - b[1], b[0] + b[1]); }
double cvi(B b, P) { return ratio(b[0] * b[1], std::sqrt(b[2])); }
double evi(B b, P p) { return ratio(b[0] - b[1], b[0] + p.C1 * b[1] - p.C2 * b[2] + p.L); }
double gari(B b, P) { return ratio(b[0] - (b[1] - (b[2] - b[3])), b[0] - (b[1] + (b[2] - b[3]))); }
double gli(B b, P) { return ratio(2.0 * b[0] - b[1] - b[2], 2.0 * b[0] + b[1] + b[2]); }
double gbndvi(B b, P) { return ratio(b[0] - (b[1] + b[2]), b[0] + (b[1] + b[2])); }
double hue(B b, P) { return ratio(2.0 * (b[0] - b[1] - b[2]), b[1] - b[2]); }
double ipvi(B b, P) { return ratio(b[0], b[0] + b[1]); }
double msavi(B b, P) {
  const double t = 2.0 * b[0] + 1.0;
  return 0.5 * (t - std::sqrt(t * t - 8.0 * (b[0] - b[1])));
}
double norm_share(B b, P) { return ratio(b[0], b[1] + b[2] + b[3]); }
double rvi(B b, P) { return ratio(ratio(b[0], b[1]), b[2] + b[1]); }
double redness(B b, P) { return ratio(b[0] * b[0], b[1] * b[2]); }
double rai(B b, P) { return ratio(b[0], b[1] + b[2]); }
double rdvi(B b, P) { return ratio(b[0] - b[1], std::sqrt(b[0] + b[1])); }
double savi(B b, P p) { return ratio((1.0 + p.L) * (b[0] - b[1]), b[0] + b[1] + p.L); }
double stress(B b, P) { return ratio(b[0] * b[1], b[2]); }

std::vector<CovariateEntry> build_registry() {
  using K = LayerKind;
  std::vector<CovariateEntry> r;
  auto ext = [&](int row, std::string name, std::string title) {
    r.push_back({row, std::move(name), std::move(title), K::external, {}, nullptr});
  };
  auto terr = [&](int row, std::string name, std::string title) {
    r.push_back({row, std::move(name), std::move(title), K::terrain, {"DEM"}, nullptr});
  };
  auto band = [&](int row, std::string name, std::string title) {
    r.push_back({row, name, std::move(title), K::band, {name}, nullptr});
  };
  auto idx = [&](int row, std::string name, std::string title, std::vector<std::string> in,
                 IndexFormula f) {
    r.push_back({row, std::move(name), std::move(title), K::index, std::move(in), f});
  };

  terr(1, "ASPECT", "Aspect");
  ext(2, "CATCHMENT_SLOPE", "Catchment slope");
  ext(3, "CHANNEL_BASE", "Channel network base level");
  ext(4, "CONVERGENCE", "Convergence index");
  ext(5, "CROSS_CURVATURE", "Cross-sectional curvature");
  ext(6, "DIFFUSE_INSOLATION", "Diffuse insolation");
  ext(7, "DIRECT_INSOLATION", "Direct insolation");
  ext(8, "DOWNSLOPE_CURVATURE", "Downslope curvature");
  band(9, "DEM", "Elevation");
  terr(10, "FLOW_ACCUMULATION", "Flow accumulation");
  ext(11, "FLOW_PATH_LENGTH", "Flow path length");
  ext(12, "LOCAL_CURVATURE", "Local curvature");
  ext(13, "MASS_BALANCE", "Mass balance index");
  ext(14, "MRRTF", "Multiresolution ridge-top flatness");
  ext(15, "MRVBF", "Multiresolution valley bottom flatness");
  ext(16, "NORMALIZED_HEIGHT", "Normalized height");
  ext(17, "NEG_OPENNESS", "Negative openness");
  ext(18, "POS_OPENNESS", "Positive openness");
  terr(19, "PLAN_CURVATURE", "Plan curvature");
  ext(20, "RELATIVE_SLOPE_POSITION", "Relative slope position");
  terr(21, "SLOPE", "Slope gradient");
  ext(22, "SLOPE_LENGTH", "Slope length");
  ext(23, "LS_FACTOR", "Slope length and steepness factor");
  terr(24, "TWI", "Topographic wetness index");
  ext(25, "TOTAL_INSOLATION", "Total insolation");
  ext(26, "UPSLOPE_CURVATURE", "Upslope curvature");
  ext(27, "VALLEY_DEPTH", "Valley depth");
  ext(28, "VRM", "Vector terrain ruggedness");
  ext(29, "CHANNEL_DISTANCE", "Vertical distance to channel network");
  ext(30, "WIND_EFFECT", "Wind effect");
  band(31, "BLUE", "Blue band");
  band(32, "GREEN", "Green band");
  band(33, "RED", "Red band");
  band(34, "NIR", "Near infrared band");
  band(35, "SWIR1", "Shortwave infrared 1 band");
  band(36, "SWIR2", "Shortwave infrared 2 band");
  ext(37, "PC1", "Principal component 1");
  ext(38, "PC2", "Principal component 2");
  ext(39, "PC3", "Principal component 3");
  ext(40, "TC1", "Tasseled cap brightness");
  ext(41, "TC2", "Tasseled cap greenness");
  ext(42, "TC3", "Tasseled cap wetness");
  idx(43, "WBDI", "Wetness brightness difference index", {"TC3", "TC1"}, wbdi);
  idx(44, "ARVI", "Atmospherically resistant vegetation index", {"NIR", "RED"}, arvi);
  idx(45, "BWDRVI", "Blue-wide dynamic range vegetation index", {"NIR", "BLUE"}, bwdrvi);
  idx(46, "BI", "Brightness index", {"RED", "NIR"}, brightness);
  idx(47, "CANOPY", "Canopy index", {"SWIR1", "GREEN"}, difference);
  idx(48, "CARBONATE", "Carbonate index", {"RED", "GREEN"}, simple_ratio);
  idx(49, "CVI", "Chlorophyll vegetation index", {"NIR", "RED", "GREEN"}, cvi);
  idx(50, "CLAY", "Clay index", {"SWIR1", "SWIR2"}, simple_ratio);
  idx(51, "COLORATION", "Coloration index", {"RED", "GREEN"}, normalized_difference);
  idx(52, "DVI", "Differenced vegetation index", {"NIR", "RED"}, difference);
  idx(53, "EVI", "Enhanced vegetation index", {"NIR", "RED", "BLUE"}, evi);
  idx(54, "FERROUS", "Ferrous minerals", {"SWIR1", "NIR"}, simple_ratio);
  idx(55, "GARI", "Green atmospherically resistant vegetation index",
      {"NIR", "GREEN", "BLUE", "RED"}, gari);
  idx(56, "GLI", "Green leaf index", {"GREEN", "RED", "BLUE"}, gli);
  idx(57, "GNDVI", "Green normalized difference vegetation index", {"NIR", "GREEN"},
      normalized_difference);
  r.push_back({58, "GVI", "Green vegetation index", LayerKind::unsupported, {}, nullptr});
  idx(59, "GBNDVI", "Green-blue NDVI", {"NIR", "GREEN", "BLUE"}, gbndvi);
  idx(60, "GRVI", "Green-red vegetation index", {"GREEN", "RED"}, difference);
  idx(61, "GYPSUM", "Gypsum index", {"SWIR1", "NIR"}, normalized_difference);
  idx(62, "HUE", "Hue index", {"RED", "GREEN", "BLUE"}, hue);
  idx(63, "IPVI", "Infrared percentage vegetation index", {"NIR", "RED"}, ipvi);
  idx(64, "IRON_OXIDE", "Iron oxide", {"RED", "BLUE"}, simple_ratio);
  idx(65, "LWC", "Leaf water content", {"SWIR1", "SWIR2"}, simple_ratio);
  idx(66, "MSAVI", "Modified soil adjusted vegetation index", {"NIR", "RED"}, msavi);
  idx(67, "NIR_RATIO", "Near infrared ratio", {"NIR", "RED"}, simple_ratio);
  idx(68, "NORM_GREEN", "Normalized green", {"GREEN", "NIR", "RED", "GREEN"}, norm_share);
  idx(69, "NORM_NIR", "Normalized NIR", {"NIR", "NIR", "RED", "GREEN"}, norm_share);
  idx(70, "NORM_RED", "Normalized red", {"RED", "NIR", "RED", "GREEN"}, norm_share);
  idx(71, "NB", "Normalized based", {"NIR", "BLUE", "GREEN"}, gbndvi);
  idx(72, "NCI", "Normalized canopy index", {"SWIR1", "GREEN"}, normalized_difference);
  idx(73, "NDMI", "Normalized difference moisture index", {"NIR", "SWIR1"}, normalized_difference);
  idx(74, "NDSI", "Normalized difference salinity index", {"RED", "NIR"}, normalized_difference);
  idx(75, "NDVI", "Normalized difference vegetation index", {"NIR", "RED"}, normalized_difference);
  r.push_back({76, "PVI", "Perpendicular vegetation index", LayerKind::unsupported, {}, nullptr});
  idx(77, "RVI", "Ratio vegetation index", {"NIR", "RED", "GREEN"}, rvi);
  idx(78, "RI", "Redness index", {"RED", "BLUE", "GREEN"}, redness);
  idx(79, "RAI", "Reflectance absorption index", {"NIR", "RED", "SWIR1"}, rai);
  idx(80, "RDVI", "Renormalized difference vegetation index", {"NIR", "RED"}, rdvi);
  band(81, "MODIS_RED", "MODIS red band");
  band(82, "MODIS_NIR", "MODIS near infrared band");
  ext(83, "MODIS_LST_NIGHT", "MODIS night land surface temperature");
  ext(84, "MODIS_LST_DAY", "MODIS day land surface temperature");
  idx(85, "MODIS_NDVI", "MODIS NDVI", {"MODIS_NIR", "MODIS_RED"}, normalized_difference);
  idx(86, "MODIS_BI", "MODIS brightness index", {"MODIS_RED", "MODIS_NIR"}, brightness);
  idx(87, "SAVI", "Soil adjusted vegetation index", {"NIR", "RED"}, savi);
  idx(88, "SLAVI", "Specific leaf area vegetation index", {"NIR", "RED", "SWIR1"}, rai);
  idx(89, "STRESS", "Stress related index", {"BLUE", "GREEN", "RED"}, stress);
  idx(90, "VI", "Vegetation index (SWIR)", {"SWIR2", "SWIR1"}, normalized_difference);
  ext(91, "PRECIP_ANNUAL", "Annual precipitation");
  ext(92, "PRECIP_SEASONALITY", "Precipitation seasonality");
  ext(93, "PRECIP_WETTEST", "Precipitation of wettest month");
  ext(94, "PRECIP_DRIEST", "Precipitation of driest month");
  ext(95, "TEMP_ANNUAL", "Mean annual temperature");
  ext(96, "WIND_SPEED", "Mean annual wind speed");
  ext(97, "VAPOR_PRESSURE", "Mean annual water vapour pressure");
  ext(98, "AET", "Mean annual actual evapotranspiration");
  ext(99, "PET", "Mean annual potential evapotranspiration");
  ext(100, "ARIDITY", "Global aridity index");
  ext(101, "SOIL_MAP", "Soil map");
  ext(102, "GEOLOGY_MAP", "Geology map");
  ext(103, "LANDUSE_MAP", "Land use map");
  ext(104, "PHYSIOGRAPHY_MAP", "Physiography map");
  ext(105, "EROSION_MAP", "Erosion classes map");
  return r;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) ==
                  std::toupper(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::band: return "band";
    case LayerKind::index: return "index";
    case LayerKind::terrain: return "terrain";
    case LayerKind::external: return "external";
    case LayerKind::unsupported: return "unsupported";
  }
  return "?";
}

const std::vector<CovariateEntry>& covariate_registry() {
  static const std::vector<CovariateEntry> registry = build_registry();
  return registry;
}

const CovariateEntry& find_covariate(std::string_view name) {
  for (const auto& e : covariate_registry()) {
    if (iequals(e.name, name)) return e;
  }
  std::string known;
  for (const auto& n : supported_indices()) known += (known.empty() ? "" : ", ") + n;
  fail(Errc::registry, "unknown covariate \"" + std::string(name) + "\"; supported indices: " + known);
}

std::vector<std::string> supported_indices() {
  std::vector<std::string> out;
  for (const auto& e : covariate_registry()) {
    if (e.kind == LayerKind::index) out.push_back(e.name);
  }
  return out;
}

double evaluate_index(const CovariateEntry& entry, std::span<const double> bands,
                      const IndexParams& params) {
  if (entry.kind != LayerKind::index || entry.formula == nullptr) {
    fail(Errc::registry, entry.name + " is " + std::string(to_string(entry.kind)) +
                             ", not a computable band index");
  }
  if (bands.size() != entry.inputs.size()) fail(Errc::shape, entry.name + " takes " +
                                                               std::to_string(entry.inputs.size()) + " bands");
  for (double b : bands) {
    if (std::isnan(b)) return kNaN;
  }
  const double v = entry.formula(bands, params);
  return std::isfinite(v) ? v : kNaN;
}

RasterGrid band_index(const RasterStack& stack, std::string_view name, const IndexParams& params) {
  const auto& entry = find_covariate(name);
  if (entry.kind != LayerKind::index) {
    std::string why = entry.kind == LayerKind::unsupported
                          ? " is flagged unsupported (its printed formula is not self-consistent)"
                          : " is a " + std::string(to_string(entry.kind)) + " layer, not a band index";
    fail(Errc::registry, entry.name + why);
  }
  std::vector<const RasterGrid*> inputs;
  for (const auto& band : entry.inputs) {
    const auto* g = stack.find(band);
    if (!g) fail(Errc::dependency, entry.name + " needs band \"" + band + "\" which is not in the stack");
    inputs.push_back(g);
  }
  const auto& def = stack.def();
  RasterGrid out(def, kNodata);
  parallel_for(def.nrows, [&](std::size_t r) {
    std::vector<double> v(inputs.size());
    for (std::size_t c = 0; c < def.ncols; ++c) {
      for (std::size_t k = 0; k < inputs.size(); ++k) v[k] = (*inputs[k])(r, c);
      out(r, c) = evaluate_index(entry, v, params);
    }
  });
  return out;
}

}  // namespace socmap
