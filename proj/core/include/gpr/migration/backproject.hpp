#pragma once

#include <filesystem>
#include <vector>

#include "gpr/scene/bscan.hpp"
#include "gpr/scene/cross_section.hpp"

namespace gpr::migration {

/// Focused energy image over a vertical section grid.
struct MigratedImage {
  scene::SectionGeometry geometry;
  std::vector<double> values;  // rows x cols, row-major

  double at(std::size_t r, std::size_t c) const { return values[r * geometry.cols + c]; }
};

/// Delay-and-sum migration: every cell accumulates |amplitude| of every
/// trace at the cell's two-way travel time (linear interpolation between
/// samples; times outside the record contribute nothing). Traces are
/// located by projecting their poses onto the grid's scan axis.
MigratedImage backproject(const scene::BScan& bscan, const scene::SectionGeometry& grid, double permittivity);

/// Cell = 1 iff value >= fraction * max. An all-zero image gives an empty
/// mask. Throws InvalidArgument unless 0 < fraction < 1.
scene::CrossSection threshold_to_cross_section(const MigratedImage& image, double fraction);

/// Stored as an f32 GPRC grid.
void save_migrated_image(const MigratedImage& image, const std::filesystem::path& path);
MigratedImage load_migrated_image(const std::filesystem::path& path);

}  // namespace gpr::migration
