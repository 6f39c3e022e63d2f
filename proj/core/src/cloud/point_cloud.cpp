#include "gpr/cloud/point_cloud.hpp"

#include "gpr/common/error.hpp"

namespace gpr::cloud {

std::vector<double> PointCloud::flatten() const {
  std::vector<double> out;
  out.reserve(points.size() * 3);
  for (const auto& p : points) {
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
  }
  return out;
}

PointCloud PointCloud::from_flat(const std::vector<double>& xyz) {
  if (xyz.size() % 3 != 0) throw InvalidArgument("flat coordinate buffer length is not a multiple of 3");
  PointCloud c;
  c.points.reserve(xyz.size() / 3);
  for (std::size_t i = 0; i < xyz.size(); i += 3) c.points.push_back({xyz[i], xyz[i + 1], xyz[i + 2]});
  return c;
}

}  // namespace gpr::cloud
