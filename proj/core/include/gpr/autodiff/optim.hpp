#pragma once

#include <cstdint>
#include <vector>

#include "gpr/autodiff/tensor.hpp"

namespace gpr::ad {

struct AdamConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Step-wise multiplicative learning-rate decay: lr(step) = lr0 *
/// factor^floor(step / interval).
struct StepDecay {
  double factor = 0.7;
  std::uint64_t interval = 50000;

  double at(double base_lr, std::uint64_t step) const;
};

/// Moment buffers and step count for a fixed parameter list.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  /// Applies one bias-corrected Adam update from the parameters' current
  /// gradients. Throws NumericalError (leaving parameters untouched) if any
  /// gradient is NaN or infinite.
  void step();
  void zero_grad();

  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  double learning_rate() const { return config_.learning_rate; }
  const AdamState& state() const { return state_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  AdamState state_;
};

}  // namespace gpr::ad
