#pragma once

#include <cstddef>
#include <vector>

#include "gpr/common/geometry.hpp"

namespace gpr::cloud {

/// Unordered set of 3D points in meters (z up, ground surface at z = 0).
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Vec3& operator[](std::size_t i) const { return points[i]; }
  Vec3& operator[](std::size_t i) { return points[i]; }

  /// Row-major n x 3 coordinates.
  std::vector<double> flatten() const;
  static PointCloud from_flat(const std::vector<double>& xyz);
};

}  // namespace gpr::cloud
