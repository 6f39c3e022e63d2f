#pragma once

#include <cstddef>
#include <cstdint>

#include "gpr/autodiff/layers.hpp"
#include "gpr/cloud/point_cloud.hpp"

namespace gpr::gprnet {

inline constexpr std::size_t kInputPoints = 1500;
inline constexpr std::size_t kGlobalFeature = 896;
inline constexpr std::size_t kSeedCount = 896;
inline constexpr std::size_t kPatchPoints = 9;
inline constexpr std::size_t kOutputPoints = kSeedCount * kPatchPoints;  // 8064

struct GprNetConfig {
  /// Divides every hidden width; 4 is the desk default, 1 the full network.
  /// Interface sizes (64/128/256 point features, |v| = 896, 256/128/64
  /// decoder features, 896 seeds, 9-point patches) never change.
  std::size_t width_divisor = 4;
  /// Half side of the 3x3 folding grid, in meters.
  double patch_delta = 0.01;
  std::uint64_t seed = 0;
};

/// Per-point features and their pooled versions from one encoder pass.
struct EncoderTrace {
  ad::Tensor f[3];  // m x 64, m x 128, m x 256
  ad::Tensor g[3];  // 64, 128, 256
};

struct DecoderTrace {
  ad::Tensor local[3];   // 256 x 3, 128 x 3, 64 x 3
  ad::Tensor global[3];  // same sizes, reshaped from v
  ad::Tensor seeds;      // 896 x 3
  ad::Tensor offsets;    // 8064 x 3
};

class GprNetModel {
 public:
  explicit GprNetModel(const GprNetConfig& config = {});

  const GprNetConfig& config() const { return config_; }

  /// points [1500 x 3] -> v [896]. Any other row count is rejected.
  ad::Tensor encode(const ad::Tensor& points, EncoderTrace* trace = nullptr) const;
  /// v [896] -> [8064 x 3].
  ad::Tensor decode(const ad::Tensor& v, DecoderTrace* trace = nullptr) const;
  ad::Tensor forward(const ad::Tensor& points) const { return decode(encode(points)); }

  cloud::PointCloud complete(const cloud::PointCloud& sparse) const;

  ad::NamedTensors parameters() const;
  std::vector<ad::Tensor> parameter_list() const;

  /// Zeroes the last folding layer so offsets vanish.
  void zero_folding_output();

 private:
  GprNetConfig config_;
  ad::Linear point_mlp_[3];
  // All-pairs feature: rows of [f_i | g_j] for i, j in 1..3, 2688 channels.
  ad::Linear pair_hidden_;
  ad::Linear pair_out_;
  ad::Linear local_fc_[3];
  ad::Linear local_expand_[3];
  ad::SharedMlp global_mlp_[3];
  ad::Linear fold_code_;
  ad::Linear fold_in_seed_, fold_in_grid_, fold_in_code_;
  ad::SharedMlp fold_tail_;
  ad::Tensor grid_;  // 9 x 2
};

/// Channel count of the all-pairs concatenation.
std::size_t pair_feature_width();

}  // namespace gpr::gprnet
