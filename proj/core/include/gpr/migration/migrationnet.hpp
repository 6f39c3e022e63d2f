#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gpr/autodiff/layers.hpp"
#include "gpr/scene/bscan.hpp"
#include "gpr/scene/cross_section.hpp"
#include "gpr/scene/scene.hpp"

namespace gpr::migration {

struct MigrationNetConfig {
  /// Channels at the end of each encoder branch; 512 matches the full
  /// network, 32 is the desk default.
  std::size_t width = 32;
  std::uint64_t seed = 0;
};

/// Intermediate tensors of one forward pass, kept for shape inspection.
struct MigrationNetTrace {
  std::vector<ad::Tensor> branch_outputs;  // three, each [W x H/8 x W/8]
  ad::Tensor fused;                        // [3W x H/8 x W/8]
  ad::Tensor logits;                       // [1 x H x W]
};

/// Multi-resolution encoder (pooling schedules 8 | 4,2 | 2,2,2), feature
/// concatenation, and a five-group decoder: three x2 up-sampling groups
/// followed by two resolution-preserving groups, with skip connections from
/// every branch's pre-pool features at the matching resolution.
class MigrationNetModel {
 public:
  explicit MigrationNetModel(const MigrationNetConfig& config = {});

  const MigrationNetConfig& config() const { return config_; }

  /// input [1 x H x W] with H, W divisible by 8 -> logits [1 x H x W].
  ad::Tensor logits(const ad::Tensor& input, MigrationNetTrace* trace = nullptr) const;

  ad::NamedTensors parameters() const;
  std::vector<ad::Tensor> parameter_list() const;

 private:
  struct Group {
    ad::Conv2d a, b;
    ad::Tensor forward(const ad::Tensor& x) const;
  };
  struct UpGroup {
    Group convs;
    std::optional<ad::Deconv2d> up;
  };

  MigrationNetConfig config_;
  Group top_;
  Group mid_[2];
  Group bottom_[3];
  UpGroup dec_[4];
  Group refine_;
  ad::Conv2d head_;
};

/// Total pooling factor every input side must divide.
inline constexpr std::size_t kMigrationPooling = 8;

/// B-scan rescaled per image to [0, 1] as a [1 x T x K] tensor. A constant
/// image maps to zeros.
ad::Tensor normalize_bscan(const scene::BScan& bscan);

/// Per-pixel probabilities, row-major T x K. Throws InvalidArgument, naming
/// the padded size required, when T or K is not a multiple of 8.
std::vector<double> migrationnet_forward(const MigrationNetModel& model, const scene::BScan& bscan);

/// Probabilities >= 0.5 become occupied cells of `geometry` (rows x cols
/// must equal the probability grid).
scene::CrossSection probabilities_to_cross_section(const std::vector<double>& probabilities,
                                                   const scene::SectionGeometry& geometry);

/// Mean binary cross-entropy of probabilities against a 0/1 mask, with
/// probabilities clamped to [1e-12, 1 - 1e-12].
double binary_cross_entropy(const std::vector<double>& probabilities, const std::vector<std::uint8_t>& mask);

/// Fraction of pixels where (p >= 0.5) agrees with the mask.
double pixel_accuracy(const std::vector<double>& probabilities, const std::vector<std::uint8_t>& mask);

/// Survey B-scan resampled onto a section grid: column c reads the trace at
/// lateral offset c * cell (linear between traces), row r reads two-way time
/// 2 r cell / v. Samples outside the recording are zero.
scene::BScan resample_to_section(const scene::BScan& bscan, const scene::SectionGeometry& geometry,
                                 double permittivity);

/// Network mask for a survey B-scan on `geometry` (sides divisible by 8).
scene::CrossSection migrate_with_network(const MigrationNetModel& model, const scene::BScan& bscan,
                                         const scene::SectionGeometry& geometry, double permittivity);

struct MigrationSample {
  scene::BScan bscan;
  scene::CrossSection target;
};

/// A B-scan and its ground-truth mask on one shared square grid: `size`
/// traces spaced `cell` apart starting at `line_start`, and `size` samples
/// whose two-way time step maps to exactly one cell of depth.
MigrationSample make_migration_sample(const scene::PipeScene& scene, const Vec3& line_start, survey::ScanAxis axis,
                                      std::size_t size, double cell, double frequency_ghz = 1.5);

struct MigrationTrainConfig {
  std::size_t steps = 2000;
  double learning_rate = 1e-3;
  bool shuffle = true;
  std::uint64_t seed = 0;
  /// Stop once training-set pixel accuracy exceeds this (checked every
  /// `eval_interval` steps); <= 0 disables early stopping.
  double target_accuracy = 0.0;
  std::size_t eval_interval = 50;
  /// Checkpoint written at the end of every epoch when set.
  std::optional<std::filesystem::path> checkpoint;
};

struct MigrationTrainLog {
  std::vector<double> step_loss;
  std::vector<double> epoch_loss;  // mean over each full pass
  std::size_t steps_run = 0;
  double final_accuracy = 0.0;
};

/// One sample per Adam step; an epoch is one pass over the dataset, in a
/// seeded random order when `shuffle` is set. A non-finite loss or gradient
/// throws NumericalError; the last epoch checkpoint is left in place.
MigrationTrainLog train_migrationnet(MigrationNetModel& model, const std::vector<MigrationSample>& dataset,
                                     const MigrationTrainConfig& config);

}  // namespace gpr::migration
