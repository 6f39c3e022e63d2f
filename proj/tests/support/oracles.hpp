#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gpr/cloud/point_cloud.hpp"
#include "gpr/common/random.hpp"

namespace gpr::testing {

// O(n^2) reference, written independently of the library's search code.
inline double brute_chamfer(const cloud::PointCloud& a, const cloud::PointCloud& b, bool squared_l2, bool l1 = false) {
  auto dist = [&](const Vec3& p, const Vec3& q) {
    const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
    if (l1) return std::abs(dx) + std::abs(dy) + std::abs(dz);
    const double s = dx * dx + dy * dy + dz * dz;
    return squared_l2 ? s : std::sqrt(s);
  };
  auto side = [&](const cloud::PointCloud& from, const cloud::PointCloud& to) {
    std::vector<double> mins;
    for (const auto& p : from.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to.points) best = std::min(best, dist(p, q));
      mins.push_back(best);
    }
    std::sort(mins.begin(), mins.end());
    double s = 0.0;
    for (double m : mins) s += m;
    return s / static_cast<double>(from.size());
  };
  return side(a, b) + side(b, a);
}

inline cloud::PointCloud random_cloud(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  cloud::PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({u(rng), u(rng), u(rng)});
  return c;
}

inline std::vector<double> random_values(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Values in [-1, 1] kept at least `gap` away from zero (relu / max kinks).
inline std::vector<double> kink_free_values(std::size_t n, Rng& rng, double gap = 0.05) {
  std::uniform_real_distribution<double> u(gap, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(n);
  for (auto& x : v) x = sign(rng) ? u(rng) : -u(rng);
  return v;
}

}  // namespace gpr::testing
