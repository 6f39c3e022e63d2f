#include "gpr/cloud/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gpr/common/error.hpp"

namespace gpr::cloud {

namespace {

std::vector<Neighbor> nearest(const PointCloud& q, const PointCloud& t, Metric metric, Search search) {
  return search == Search::Indexed ? nearest_indexed(q.points, t.points, metric)
                                   : nearest_brute_force(q.points, t.points, metric);
}

double sorted_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

void require_nonempty(const PointCloud& s, const PointCloud& s_gt) {
  if (s.empty() || s_gt.empty()) throw InvalidArgument("Chamfer/L1 distance needs two non-empty clouds");
}

}  // namespace

ChamferResult chamfer_distance(const PointCloud& s, const PointCloud& s_gt, ChamferVariant variant, Search search) {
  require_nonempty(s, s_gt);
  const auto fwd = nearest(s, s_gt, Metric::SquaredL2, search);
  const auto bwd = nearest(s_gt, s, Metric::SquaredL2, search);
  const bool squared = variant == ChamferVariant::Squared;
  auto term = [&](double d2) { return squared ? d2 : std::sqrt(d2); };

  std::vector<double> a(fwd.size()), b(bwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) a[i] = term(fwd[i].distance);
  for (std::size_t j = 0; j < bwd.size(); ++j) b[j] = term(bwd[j].distance);

  ChamferResult r;
  r.value = sorted_mean(std::move(a)) + sorted_mean(std::move(b));
  r.gradient.assign(s.size(), Vec3{});
  const double ns = static_cast<double>(s.size()), ng = static_cast<double>(s_gt.size());
  auto pair_grad = [&](const Vec3& x, const Vec3& y, double d2) -> Vec3 {
    const Vec3 diff = x - y;
    if (squared) return 2.0 * diff;
    return d2 > 0.0 ? (1.0 / std::sqrt(d2)) * diff : Vec3{};
  };
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    r.gradient[i] = r.gradient[i] + (1.0 / ns) * pair_grad(s[i], s_gt[fwd[i].index], fwd[i].distance);
  }
  for (std::size_t j = 0; j < bwd.size(); ++j) {
    const std::size_t k = bwd[j].index;
    r.gradient[k] = r.gradient[k] + (1.0 / ng) * pair_grad(s[k], s_gt[j], bwd[j].distance);
  }
  return r;
}

double l1_nn_distance(const PointCloud& s, const PointCloud& s_gt, Search search) {
  require_nonempty(s, s_gt);
  const auto fwd = nearest(s, s_gt, Metric::L1, search);
  const auto bwd = nearest(s_gt, s, Metric::L1, search);
  std::vector<double> a(fwd.size()), b(bwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) a[i] = fwd[i].distance;
  for (std::size_t j = 0; j < bwd.size(); ++j) b[j] = bwd[j].distance;
  return sorted_mean(std::move(a)) + sorted_mean(std::move(b));
}

PointCloud cloud_from_tensor(const ad::Tensor& points) {
  if (points.rank() != 2 || points.dim(1) != 3) {
    throw InvalidArgument("expected an [n x 3] point tensor, got " + ad::shape_string(points.shape()));
  }
  const auto d = points.data();
  return PointCloud::from_flat({d.begin(), d.end()});
}

ad::Tensor tensor_from_cloud(const PointCloud& cloud, bool requires_grad) {
  if (cloud.empty()) throw InvalidArgument("cannot build a tensor from an empty cloud");
  return ad::Tensor::from_data({cloud.size(), 3}, cloud.flatten(), requires_grad);
}

ad::Tensor chamfer_loss(const ad::Tensor& prediction, const PointCloud& s_gt, ChamferVariant variant) {
  const PointCloud s = cloud_from_tensor(prediction);
  ChamferResult r = chamfer_distance(s, s_gt, variant);
  return ad::make_result("chamfer", {1}, {r.value}, {prediction},
                         [grad = std::move(r.gradient)](std::span<const double> g,
                                                        std::span<const std::span<double>> gi) {
                           for (std::size_t i = 0; i < grad.size(); ++i) {
                             gi[0][3 * i] += g[0] * grad[i].x;
                             gi[0][3 * i + 1] += g[0] * grad[i].y;
                             gi[0][3 * i + 2] += g[0] * grad[i].z;
                           }
                         });
}

}  // namespace gpr::cloud
