#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "socmap/raster/grid.hpp"
#include "socmap/samples.hpp"

namespace fixtures {

/// Friedman #1: ten U(0,1) features, five informative, unit Gaussian noise.
socmap::SampleTable friedman1(std::size_t n, std::uint64_t seed, double noise_sd = 1.0);

/// y = 2 x1 - 3 x2 + N(0, noise_sd^2) with `p` N(0,1) features named x1..xp.
socmap::SampleTable planted(std::size_t n, std::size_t p, std::uint64_t seed, double noise_sd = 0.5);

/// 16x16 synthetic landscape (ELEV, NDVI, MOIST, NOISE) with samples drawn at
/// random locations and a three-class zone map.
struct Landscape {
  socmap::RasterStack stack;
  socmap::RasterGrid zones;
  socmap::SampleTable samples;
};
Landscape landscape(std::size_t n_samples, std::uint64_t seed, std::size_t size = 16);

/// Writes samples.csv, stack/ (grids + stack.json) and zones.asc under `dir`.
void write_landscape(const Landscape& l, const std::filesystem::path& dir);

/// Fresh empty directory below the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace fixtures
