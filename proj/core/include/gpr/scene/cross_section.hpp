#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gpr/common/geometry.hpp"
#include "gpr/survey/plan.hpp"

namespace gpr::scene {

/// Georeference of a vertical section grid: `origin` is the world position
/// of cell (0, 0); columns advance along `axis`, rows advance downwards.
struct SectionPose {
  Vec3 origin;
  survey::ScanAxis axis = survey::ScanAxis::X;
};

struct SectionGeometry {
  std::size_t rows = 128;  // depth cells
  std::size_t cols = 128;  // lateral cells
  double cell = 0.0;       // m
  SectionPose pose;

  /// World position of grid node (row, col).
  Vec3 position(std::size_t row, std::size_t col) const;
};

/// Section covering a whole scan line laterally with square cells.
SectionGeometry section_for_line(const survey::ScanLine& line, std::size_t rows = 128, std::size_t cols = 128);

/// Binary occupancy image (rows = depth, cols = lateral).
struct CrossSection {
  SectionGeometry geometry;
  std::vector<std::uint8_t> mask;

  std::size_t rows() const { return geometry.rows; }
  std::size_t cols() const { return geometry.cols; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return mask[r * geometry.cols + c]; }
  std::size_t occupied() const;
};

/// On-disk section grid. Layout (little-endian):
///   "GPRC" | u32 H | u32 W | f64 cell_m | pose origin (3 x f64) |
///   u8 dtype (0 = f32, 1 = u8) | u8 scan axis (0 = x, 1 = y) |
///   H*W values of dtype, row-major
struct GridFile {
  enum class Dtype : std::uint8_t { F32 = 0, U8 = 1 };

  SectionGeometry geometry;
  Dtype dtype = Dtype::U8;
  std::vector<float> f32;
  std::vector<std::uint8_t> u8;
};

void write_grid(std::ostream& out, const GridFile& grid);
GridFile read_grid(std::istream& in);
void save_grid(const GridFile& grid, const std::filesystem::path& path);
GridFile load_grid(const std::filesystem::path& path);

void save_cross_section(const CrossSection& section, const std::filesystem::path& path);
/// Accepts u8 masks; f32 grids are rejected.
CrossSection load_cross_section(const std::filesystem::path& path);

}  // namespace gpr::scene
