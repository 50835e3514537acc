#pragma once

#include <string_view>

#include "socmap/raster/grid.hpp"

namespace socmap {

enum class TerrainAttribute { slope, aspect, plan_curvature, flow_accumulation, twi };

TerrainAttribute terrain_attribute_from_string(std::string_view name);
std::string_view to_string(TerrainAttribute attribute);

/// Slope and aspect use Horn's 3x3 weights, plan curvature the
/// Zevenbergen-Thorne quadratic, both with reflected padding at the border.
///
/// - slope: degrees.
/// - aspect: compass degrees of the downslope direction, -1 on flat cells.
/// - flow_accumulation: D8 routing, upstream cell count (self included) times
///   cell area. Steepest drop wins, ties go to the first neighbour in
///   row-major 3x3 order; cells without a lower neighbour are sinks.
/// - twi: ln(max(FA / cellsize, cellsize) / max(tan(slope), 0.001)).
///
/// Any nodata cell in a stencil makes the output nodata.
RasterGrid terrain(const RasterGrid& dem, TerrainAttribute attribute);

/// D8 receiver of every cell as a flat index, or -1 for sinks and nodata.
std::vector<long> d8_receivers(const RasterGrid& dem);

}  // namespace socmap
