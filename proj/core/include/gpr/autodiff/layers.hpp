#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gpr/autodiff/tensor.hpp"
#include "gpr/common/random.hpp"

namespace gpr::ad {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

/// Dense layer y = x W + b with W [in x out].
struct Linear {
  Tensor weight;
  Tensor bias;

  /// He-uniform weights, zero bias.
  static Linear init(std::size_t in, std::size_t out, Rng& rng);

  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
  /// x [n x in] -> [n x out]
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, NamedTensors& out) const;
};

/// Stack of Linear layers applied independently to every row of an [m x d]
/// point matrix (a 1x1 convolution over points). ReLU follows every layer
/// except, optionally, the last.
class SharedMlp {
 public:
  SharedMlp() = default;
  SharedMlp(std::size_t in, const std::vector<std::size_t>& layer_dims, Rng& rng, bool relu_last = true);

  Tensor forward(const Tensor& points) const;

  std::size_t in_features() const { return layers_.front().in_features(); }
  std::size_t out_features() const { return layers_.back().out_features(); }
  std::vector<Linear>& layers() { return layers_; }
  const std::vector<Linear>& layers() const { return layers_; }
  void collect(const std::string& prefix, NamedTensors& out) const;

 private:
  std::vector<Linear> layers_;
  bool relu_last_ = true;
};

/// Square-kernel convolution weights [out x in x K x K] + bias.
struct Conv2d {
  Tensor weight;
  Tensor bias;
  std::size_t padding = 0;

  static Conv2d init(std::size_t in, std::size_t out, std::size_t kernel, std::size_t padding, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, NamedTensors& out) const;
};

/// Transposed convolution weights [in x out x K x K] with stride K.
struct Deconv2d {
  Tensor weight;
  Tensor bias;

  static Deconv2d init(std::size_t in, std::size_t out, std::size_t kernel, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, NamedTensors& out) const;
};

/// Copies values from `source` into same-named, same-shaped tensors of
/// `target`. Throws DataError on any missing name or shape difference.
void assign_parameters(const NamedTensors& target, const NamedTensors& source);

std::size_t parameter_count(const NamedTensors& params);

}  // namespace gpr::ad
