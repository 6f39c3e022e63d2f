#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "gpr/autodiff/tensor.hpp"

namespace gpr::testing {

struct GradCheck {
  double max_rel = 0.0;
  std::size_t worst = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central differences of a scalar loss w.r.t. entries of `x`, compared
// to the tape's gradient. rel = |a - n| / max(|a|, |n|, floor).
inline GradCheck check_gradient(const std::function<ad::Tensor()>& loss, ad::Tensor x,
                                std::vector<std::size_t> indices = {}, double h = 1e-5,
                                double floor = 1e-3) {
  x.zero_grad();
  loss().backward();
  const std::vector<double> analytic(x.grad().begin(), x.grad().end());
  if (indices.empty()) {
    indices.resize(x.numel());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  }
  GradCheck out;
  auto data = x.mutable_data();
  for (auto i : indices) {
    const double saved = data[i];
    data[i] = saved + h;
    const double fp = loss().item();
    data[i] = saved - h;
    const double fm = loss().item();
    data[i] = saved;
    const double n = (fp - fm) / (2.0 * h);
    const double a = analytic[i];
    const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
    if (rel >= out.max_rel) out = {rel, i, a, n};
  }
  return out;
}

}  // namespace gpr::testing
