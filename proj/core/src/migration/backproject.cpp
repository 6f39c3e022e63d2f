#include "gpr/migration/backproject.hpp"

#include <algorithm>
#include <cmath>

#include "gpr/common/error.hpp"
#include "gpr/scene/forward.hpp"

namespace gpr::migration {

MigratedImage backproject(const scene::BScan& bscan, const scene::SectionGeometry& grid, double permittivity) {
  bscan.validate();
  if (grid.rows == 0 || grid.cols == 0 || !(grid.cell > 0.0)) throw InvalidArgument("invalid migration grid");
  const double v = scene::wave_speed(permittivity);
  const Vec3 dir = survey::axis_direction(grid.pose.axis);

  std::vector<double> along(bscan.traces);
  for (std::size_t k = 0; k < bscan.traces; ++k) along[k] = dot(bscan.poses[k].position - grid.pose.origin, dir);

  std::vector<double> envelope(bscan.amplitude.size());
  for (std::size_t i = 0; i < envelope.size(); ++i) envelope[i] = std::abs(static_cast<double>(bscan.amplitude[i]));

  MigratedImage img;
  img.geometry = grid;
  img.values.assign(grid.rows * grid.cols, 0.0);
  const double last = static_cast<double>(bscan.samples - 1);
  // Each cell is independent, so the result does not depend on thread count.
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < grid.rows; ++r) {
    const double depth = static_cast<double>(r) * grid.cell;
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const double lateral = static_cast<double>(c) * grid.cell;
      double acc = 0.0;
      for (std::size_t k = 0; k < bscan.traces; ++k) {
        const double dx = along[k] - lateral;
        const double t = 2.0 * std::sqrt(dx * dx + depth * depth) / v;
        const double pos = t / bscan.dt_ns;
        if (pos > last) continue;
        const auto i0 = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i0);
        const double a0 = envelope[i0 * bscan.traces + k];
        const double a1 = i0 + 1 < bscan.samples ? envelope[(i0 + 1) * bscan.traces + k] : 0.0;
        acc += a0 + frac * (a1 - a0);
      }
      img.values[r * grid.cols + c] = acc;
    }
  }
  return img;
}

scene::CrossSection threshold_to_cross_section(const MigratedImage& image, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("threshold fraction must lie in (0, 1)");
  scene::CrossSection cs;
  cs.geometry = image.geometry;
  cs.mask.assign(image.values.size(), 0);
  const double peak = image.values.empty() ? 0.0 : *std::max_element(image.values.begin(), image.values.end());
  if (!(peak > 0.0)) return cs;
  const double level = fraction * peak;
  for (std::size_t i = 0; i < image.values.size(); ++i) cs.mask[i] = image.values[i] >= level ? 1 : 0;
  return cs;
}

void save_migrated_image(const MigratedImage& image, const std::filesystem::path& path) {
  scene::GridFile grid;
  grid.geometry = image.geometry;
  grid.dtype = scene::GridFile::Dtype::F32;
  grid.f32.assign(image.values.begin(), image.values.end());
  scene::save_grid(grid, path);
}

MigratedImage load_migrated_image(const std::filesystem::path& path) {
  scene::GridFile grid = scene::load_grid(path);
  if (grid.dtype != scene::GridFile::Dtype::F32) throw FormatError(path.string() + " is not an f32 image grid");
  return {grid.geometry, std::vector<double>(grid.f32.begin(), grid.f32.end())};
}

}  // namespace gpr::migration
