#include "gpr/scene/cross_section.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "gpr/common/binary_io.hpp"
#include "gpr/common/error.hpp"

namespace gpr::scene {

Vec3 SectionGeometry::position(std::size_t row, std::size_t col) const {
  const Vec3 dir = survey::axis_direction(pose.axis);
  return pose.origin + (static_cast<double>(col) * cell) * dir + Vec3{0.0, 0.0, -static_cast<double>(row) * cell};
}

SectionGeometry section_for_line(const survey::ScanLine& line, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols < 2) throw InvalidArgument("section grid needs rows >= 1 and cols >= 2");
  SectionGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.cell = line.length() / static_cast<double>(cols - 1);
  const Vec3 lo{std::min(line.start.x, line.end.x), std::min(line.start.y, line.end.y), 0.0};
  g.pose = {lo, line.axis()};
  return g;
}

std::size_t CrossSection::occupied() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

void write_grid(std::ostream& out, const GridFile& grid) {
  const auto& g = grid.geometry;
  const std::size_t n = g.rows * g.cols;
  if (n == 0) throw InvalidArgument("grid has a zero dimension");
  if ((grid.dtype == GridFile::Dtype::F32 && grid.f32.size() != n) ||
      (grid.dtype == GridFile::Dtype::U8 && grid.u8.size() != n)) {
    throw InvalidArgument("grid payload does not match H*W");
  }
  io::write_magic(out, "GPRC");
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.rows));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.cols));
  io::write_le<double>(out, g.cell);
  io::write_le<double>(out, g.pose.origin.x);
  io::write_le<double>(out, g.pose.origin.y);
  io::write_le<double>(out, g.pose.origin.z);
  io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(grid.dtype));
  io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(g.pose.axis));
  if (grid.dtype == GridFile::Dtype::F32) {
    io::write_array(out, grid.f32.data(), n);
  } else {
    io::write_array(out, grid.u8.data(), n);
  }
}

GridFile read_grid(std::istream& in) {
  io::expect_magic(in, "GPRC");
  GridFile grid;
  auto& g = grid.geometry;
  g.rows = io::read_le<std::uint32_t>(in, "H");
  g.cols = io::read_le<std::uint32_t>(in, "W");
  if (g.rows == 0 || g.cols == 0) throw FormatError("grid header has a zero dimension");
  g.cell = io::read_le<double>(in, "cell");
  g.pose.origin.x = io::read_le<double>(in, "pose");
  g.pose.origin.y = io::read_le<double>(in, "pose");
  g.pose.origin.z = io::read_le<double>(in, "pose");
  const auto dtype = io::read_le<std::uint8_t>(in, "dtype");
  const auto axis = io::read_le<std::uint8_t>(in, "axis");
  if (dtype > 1) throw FormatError("unknown grid dtype " + std::to_string(dtype));
  if (axis > 1) throw FormatError("unknown scan axis " + std::to_string(axis));
  grid.dtype = static_cast<GridFile::Dtype>(dtype);
  g.pose.axis = static_cast<survey::ScanAxis>(axis);
  const std::size_t n = g.rows * g.cols;
  if (grid.dtype == GridFile::Dtype::F32) {
    grid.f32.resize(n);
    io::read_array(in, grid.f32.data(), n, "grid values");
  } else {
    grid.u8.resize(n);
    io::read_array(in, grid.u8.data(), n, "grid values");
  }
  return grid;
}

void save_grid(const GridFile& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write grid " + path.string());
  write_grid(out, grid);
}

GridFile load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open grid " + path.string());
  return read_grid(in);
}

void save_cross_section(const CrossSection& section, const std::filesystem::path& path) {
  GridFile grid;
  grid.geometry = section.geometry;
  grid.dtype = GridFile::Dtype::U8;
  grid.u8 = section.mask;
  save_grid(grid, path);
}

CrossSection load_cross_section(const std::filesystem::path& path) {
  GridFile grid = load_grid(path);
  if (grid.dtype != GridFile::Dtype::U8) throw FormatError(path.string() + " is not a binary mask");
  for (auto v : grid.u8) {
    if (v > 1) throw FormatError(path.string() + ": mask values must be 0 or 1");
  }
  return {grid.geometry, std::move(grid.u8)};
}

}  // namespace gpr::scene
