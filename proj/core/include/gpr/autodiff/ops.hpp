#pragma once

#include <cstddef>
#include <vector>

#include "gpr/autodiff/tensor.hpp"

// Differentiable primitives. Shapes are never broadcast implicitly; every op
// documents the exact shapes it accepts and throws InvalidArgument (quoting
// the offending shapes) otherwise.
namespace gpr::ad {

/// [n x k] . [k x m] -> [n x m]
Tensor matmul(const Tensor& a, const Tensor& b);

/// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// [n x m] + bias[m] added to every row.
Tensor add_bias(const Tensor& a, const Tensor& bias);
/// Channel bias for [C x H x W] feature maps, bias[C].
Tensor add_channel_bias(const Tensor& a, const Tensor& bias);

Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);

/// Concatenation along `axis`; all other dims must agree.
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor reshape(const Tensor& a, Shape shape);
/// Half-open range [begin, end) along `axis`.
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);

/// Maximum along `axis`, which is removed from the shape. Ties route the
/// gradient to the lowest index.
Tensor max_reduce(const Tensor& a, std::size_t axis);
/// Sum of all elements -> [1].
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// [m] or [1 x m] -> [n x m], every row a copy.
Tensor broadcast_rows(const Tensor& row, std::size_t n);
/// [n x m] -> [n*r x m], each row repeated r times consecutively.
Tensor repeat_rows(const Tensor& a, std::size_t r);
/// [n x m] -> [n*r x m], the whole block stacked r times.
Tensor tile_rows(const Tensor& a, std::size_t r);

/// input [C_in x H x W], weight [C_out x C_in x K x K], bias [C_out] (or
/// undefined). Output spatial size floor((H + 2p - K) / s) + 1.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride = 1,
              std::size_t padding = 0);
/// Non-overlapping max pooling with window = stride = kernel.
Tensor maxpool2d(const Tensor& input, std::size_t kernel);
/// Transposed convolution. input [C_in x H x W], weight [C_in x C_out x K x K];
/// output spatial size (H - 1) * s + K, so K = s = 2 doubles H and W.
Tensor deconv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride);

/// Mean binary cross-entropy of sigmoid(logits) against targets in [0,1].
/// `targets` is treated as a constant.
Tensor bce_with_logits(const Tensor& logits, const Tensor& targets);

}  // namespace gpr::ad
