#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socmap/raster/grid.hpp"

namespace socmap {

/// Constants appearing in soil-adjusted and enhanced vegetation indices.
struct IndexParams {
  double L = 0.5;
  double C1 = 6.0;
  double C2 = 7.5;
};

enum class LayerKind {
  band,         // raw input band
  index,        // closed-form band algebra, computed by band_index
  terrain,      // derived from the DEM by terrain()
  external,     // must be supplied as a precomputed layer
  unsupported,  // formula is not self-consistent as printed
};

std::string_view to_string(LayerKind kind);

using IndexFormula = double (*)(std::span<const double> bands, const IndexParams& params);

struct CovariateEntry {
  int row = 0;  // position in the covariate catalogue (1-105)
  std::string name;
  std::string title;
  LayerKind kind = LayerKind::external;
  std::vector<std::string> inputs;  // stack layer names, in formula argument order
  IndexFormula formula = nullptr;
};

/// Full covariate catalogue, ordered by row.
const std::vector<CovariateEntry>& covariate_registry();

/// Case-insensitive lookup by name; throws Errc::registry if unknown.
const CovariateEntry& find_covariate(std::string_view name);

/// Names of every entry computable by band_index.
std::vector<std::string> supported_indices();

/// Scalar evaluation; NaN if any input is NaN, a guarded denominator is
/// below 1e-12 in magnitude, or the result is not finite.
double evaluate_index(const CovariateEntry& entry, std::span<const double> bands,
                      const IndexParams& params = {});

RasterGrid band_index(const RasterStack& stack, std::string_view name,
                      const IndexParams& params = {});

}  // namespace socmap
