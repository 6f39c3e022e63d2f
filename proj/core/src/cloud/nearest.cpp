#include "gpr/cloud/nearest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpr/common/error.hpp"

namespace gpr::cloud {

namespace {

constexpr std::size_t kLeafSize = 12;

double coord(const Vec3& p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

bool finite(const Vec3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

void require_finite(std::span<const Vec3> points) {
  for (const auto& p : points) {
    if (!finite(p)) throw NumericalError("nearest-neighbor search on a non-finite point");
  }
}

bool better(double d, std::size_t i, const Neighbor& best) {
  return d < best.distance || (d == best.distance && i < best.index);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()), order_(points.size()) {
  if (points_.empty()) throw InvalidArgument("nearest-neighbor index over an empty cloud");
  require_finite(points_);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  build(0, points_.size());
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end, -1, 0.0, 0, 0});
  if (end - begin <= kLeafSize) return id;
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Vec3 ext = hi - lo;
  const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
  if (coord(ext, axis) == 0.0) return id;  // all points coincide
  const std::size_t mid = begin + (end - begin) / 2;
  auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
  std::nth_element(first, order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                     return coord(points_[a], axis) < coord(points_[b], axis);
                   });
  const double split = coord(points_[order_[mid]], axis);
  // Left holds coordinates <= split, right holds >= split.
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::size_t id, const Vec3& q, Metric metric, Neighbor& best) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const double d = point_distance(q, points_[idx], metric);
      if (better(d, idx, best)) best = {idx, d};
    }
    return;
  }
  const double diff = coord(q, node.axis) - node.split;
  const std::size_t near = diff <= 0.0 ? node.left : node.right;
  const std::size_t far = diff <= 0.0 ? node.right : node.left;
  search(near, q, metric, best);
  // Any point across the plane is at least |diff| away along this axis; the
  // rounded per-axis term is monotone in the true separation, so the bound
  // is exact. Equality is still searched so lower-index ties are found.
  const double bound = metric == Metric::SquaredL2 ? diff * diff : std::abs(diff);
  if (bound <= best.distance) search(far, q, metric, best);
}

Neighbor KdTree::nearest(const Vec3& query, Metric metric) const {
  if (!finite(query)) throw NumericalError("nearest-neighbor search on a non-finite point");
  Neighbor best{points_.size(), std::numeric_limits<double>::infinity()};
  search(0, query, metric, best);
  return best;
}

std::vector<Neighbor> nearest_brute_force(std::span<const Vec3> queries, std::span<const Vec3> targets, Metric metric) {
  if (targets.empty()) throw InvalidArgument("nearest neighbor over an empty cloud");
  require_finite(queries);
  require_finite(targets);
  std::vector<Neighbor> out(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    Neighbor best{0, point_distance(queries[q], targets[0], metric)};
    for (std::size_t i = 1; i < targets.size(); ++i) {
      const double d = point_distance(queries[q], targets[i], metric);
      if (d < best.distance) best = {i, d};
    }
    out[q] = best;
  }
  return out;
}

std::vector<Neighbor> nearest_indexed(std::span<const Vec3> queries, std::span<const Vec3> targets, Metric metric) {
  const KdTree tree(targets);
  std::vector<Neighbor> out(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) out[q] = tree.nearest(queries[q], metric);
  return out;
}

}  // namespace gpr::cloud
