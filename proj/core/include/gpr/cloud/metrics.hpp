#pragma once

#include <vector>

#include "gpr/autodiff/tensor.hpp"
#include "gpr/cloud/nearest.hpp"
#include "gpr/cloud/point_cloud.hpp"

namespace gpr::cloud {

enum class ChamferVariant {
  Squared,    // mean squared nearest distance, both directions (training loss)
  Euclidean,  // mean unsquared nearest distance
};

enum class Search { Indexed, BruteForce };

struct ChamferResult {
  double value = 0.0;
  /// d value / d S, one entry per point of S.
  std::vector<Vec3> gradient;
};

/// Bidirectional Chamfer distance
///   1/|S| sum_x min_y d(x, y) + 1/|S_gt| sum_y min_x d(y, x).
/// Per-point minima are summed in ascending order so the value does not
/// depend on point order. Ties pick the lowest-index neighbor, which also
/// receives the gradient. Throws InvalidArgument on an empty cloud.
ChamferResult chamfer_distance(const PointCloud& s, const PointCloud& s_gt,
                               ChamferVariant variant = ChamferVariant::Squared, Search search = Search::Indexed);

/// Same nearest-neighbor structure with L1 point distances.
double l1_nn_distance(const PointCloud& s, const PointCloud& s_gt, Search search = Search::Indexed);

/// Chamfer loss as a differentiable op on an [n x 3] prediction; the ground
/// truth is constant.
ad::Tensor chamfer_loss(const ad::Tensor& prediction, const PointCloud& s_gt,
                        ChamferVariant variant = ChamferVariant::Squared);

PointCloud cloud_from_tensor(const ad::Tensor& points);
ad::Tensor tensor_from_cloud(const PointCloud& cloud, bool requires_grad = false);

}  // namespace gpr::cloud
