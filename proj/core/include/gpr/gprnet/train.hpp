#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "gpr/gprnet/dataset.hpp"
#include "gpr/gprnet/model.hpp"

namespace gpr::gprnet {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 5e-5;
  double decay_factor = 0.7;
  std::uint64_t decay_interval = 50000;  // optimizer steps
  std::uint64_t seed = 0;
  std::size_t validation_count = 100;
  std::size_t test_count = 150;
  /// Stops after this many optimizer steps when nonzero.
  std::size_t max_steps = 0;

  /// Throws InvalidArgument on a non-positive field.
  void validate() const;
};

struct EpochRow {
  std::size_t step = 0;  // optimizer steps completed
  double train_cd = 0.0; // mean batch loss over the epoch
  double val_cd = 0.0;   // NaN when there is no validation set
  double lr = 0.0;
};

struct TrainReport {
  std::vector<EpochRow> epochs;
  std::vector<double> step_loss;
  double best_val_cd = 0.0;
  std::size_t best_epoch = 0;
};

struct TrainOutputs {
  std::optional<std::filesystem::path> metrics_csv;      // step,train_cd,val_cd,lr
  std::optional<std::filesystem::path> best_checkpoint;  // lowest validation CD so far
};

/// Adam on the mean squared Chamfer loss of each batch. Batches are drawn
/// from a seeded shuffle every epoch. A non-finite loss or gradient throws
/// NumericalError; files already written are left as they were.
TrainReport train_gprnet(GprNetModel& model, const std::vector<Sample>& train, const std::vector<Sample>& validation,
                         const TrainConfig& config, const TrainOutputs& outputs = {});

/// Mean squared Chamfer distance of the model over a set.
double mean_chamfer(const GprNetModel& model, const std::vector<Sample>& samples);

struct SampleMetrics {
  double cd = 0.0;
  double l1 = 0.0;
};

struct EvalReport {
  std::vector<SampleMetrics> samples;
  double cd_x1e3 = 0.0;  // mean CD x 10^3
  double l1_x100 = 0.0;  // mean L1 x 100
};

using Predictor = std::function<cloud::PointCloud(const Sample&)>;

EvalReport evaluate(const Predictor& predict, const std::vector<Sample>& test);
EvalReport evaluate(const GprNetModel& model, const std::vector<Sample>& test);

/// Predictor that returns the ground truth unchanged.
Predictor perfect_stub();

}  // namespace gpr::gprnet
