#include "gpr/autodiff/optim.hpp"

#include <cmath>
#include <string>

#include "gpr/common/error.hpp"

namespace gpr::ad {

double StepDecay::at(double base_lr, std::uint64_t step) const {
  if (interval == 0) return base_lr;
  return base_lr * std::pow(factor, static_cast<double>(step / interval));
}

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (const auto& p : params_) {
    state_.first_moment.emplace_back(p.numel(), 0.0);
    state_.second_moment.emplace_back(p.numel(), 0.0);
  }
}

void Adam::step() {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    for (double g : params_[k].grad()) {
      if (!std::isfinite(g)) {
        throw NumericalError("non-finite gradient in parameter #" + std::to_string(k) + " at step " +
                             std::to_string(state_.step + 1));
      }
    }
  }
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    const auto g = p.grad();
    if (g.empty()) continue;
    auto x = p.mutable_data();
    auto& m = state_.first_moment[k];
    auto& v = state_.second_moment[k];
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      x[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace gpr::ad
