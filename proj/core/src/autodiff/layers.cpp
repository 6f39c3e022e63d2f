#include "gpr/autodiff/layers.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gpr/autodiff/ops.hpp"
#include "gpr/common/error.hpp"

namespace gpr::ad {

namespace {

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(element_count(shape));
  for (auto& v : data) v = dist(rng);
  return Tensor::from_data(std::move(shape), std::move(data), true);
}

}  // namespace

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in));
  return {uniform_tensor({in, out}, bound, rng), Tensor::zeros({out}, true)};
}

Tensor Linear::forward(const Tensor& x) const { return add_bias(matmul(x, weight), bias); }

void Linear::collect(const std::string& prefix, NamedTensors& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

SharedMlp::SharedMlp(std::size_t in, const std::vector<std::size_t>& layer_dims, Rng& rng, bool relu_last)
    : relu_last_(relu_last) {
  if (layer_dims.empty()) throw InvalidArgument("shared MLP needs at least one layer");
  std::size_t prev = in;
  for (auto d : layer_dims) {
    layers_.push_back(Linear::init(prev, d, rng));
    prev = d;
  }
}

Tensor SharedMlp::forward(const Tensor& points) const {
  if (points.rank() != 2 || points.dim(0) == 0) {
    throw InvalidArgument("shared MLP expects a non-empty [m x d] point matrix, got " +
                          shape_string(points.shape()));
  }
  if (points.dim(1) != in_features()) {
    throw InvalidArgument("shared MLP expects " + std::to_string(in_features()) + " input features, got " +
                          shape_string(points.shape()));
  }
  Tensor x = points;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].forward(x);
    if (i + 1 < layers_.size() || relu_last_) x = relu(x);
  }
  return x;
}

void SharedMlp::collect(const std::string& prefix, NamedTensors& out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect(prefix + "." + std::to_string(i), out);
}

Conv2d Conv2d::init(std::size_t in, std::size_t out, std::size_t kernel, std::size_t padding, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in * kernel * kernel));
  return {uniform_tensor({out, in, kernel, kernel}, bound, rng), Tensor::zeros({out}, true), padding};
}

Tensor Conv2d::forward(const Tensor& x) const { return conv2d(x, weight, bias, 1, padding); }

void Conv2d::collect(const std::string& prefix, NamedTensors& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

Deconv2d Deconv2d::init(std::size_t in, std::size_t out, std::size_t kernel, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in));
  return {uniform_tensor({in, out, kernel, kernel}, bound, rng), Tensor::zeros({out}, true)};
}

Tensor Deconv2d::forward(const Tensor& x) const { return deconv2d(x, weight, bias, weight.dim(2)); }

void Deconv2d::collect(const std::string& prefix, NamedTensors& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

void assign_parameters(const NamedTensors& target, const NamedTensors& source) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : source) by_name[name] = &t;
  for (const auto& [name, t] : target) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("checkpoint is missing parameter '" + name + "'");
    if (it->second->shape() != t.shape()) {
      throw DataError("parameter '" + name + "' has shape " + shape_string(it->second->shape()) +
                      ", model expects " + shape_string(t.shape()));
    }
    auto dst = const_cast<Tensor&>(t).mutable_data();
    const auto src = it->second->data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

std::size_t parameter_count(const NamedTensors& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

}  // namespace gpr::ad
