#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "gpr/common/geometry.hpp"

namespace gpr::cloud {

enum class Metric { SquaredL2, L1 };

/// Point distance exactly as every nearest-neighbor routine computes it.
inline double point_distance(const Vec3& a, const Vec3& b, Metric metric) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  if (metric == Metric::SquaredL2) return dx * dx + dy * dy + dz * dz;
  return std::abs(dx) + std::abs(dy) + std::abs(dz);
}

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Exact k-d tree nearest-neighbor index. Results equal a linear scan
/// bit-for-bit: the same distance expression is evaluated and ties resolve
/// to the lowest point index. Non-finite points or queries throw
/// NumericalError.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  Neighbor nearest(const Vec3& query, Metric metric) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::size_t begin, end;  // range in order_
    int axis;                // -1 for leaf
    double split;
    std::size_t left, right;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const Vec3& q, Metric metric, Neighbor& best) const;

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Nearest neighbor of every query by exhaustive scan.
std::vector<Neighbor> nearest_brute_force(std::span<const Vec3> queries, std::span<const Vec3> targets, Metric metric);
/// Same result through a k-d tree.
std::vector<Neighbor> nearest_indexed(std::span<const Vec3> queries, std::span<const Vec3> targets, Metric metric);

}  // namespace gpr::cloud
