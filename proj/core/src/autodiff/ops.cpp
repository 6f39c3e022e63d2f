#include "gpr/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>

#include "gpr/common/error.hpp"
#include "kernels.hpp"

namespace gpr::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw InvalidArgument(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw InvalidArgument(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                          shape_string(a.shape()));
  }
}

std::vector<double> copy_of(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

// Splits `shape` around `axis` into (outer, extent, inner) strides.
struct AxisView {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisView axis_view(const Shape& shape, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k) shape_error("matmul", a, b);
  std::vector<double> out(n * m, 0.0);
  kernels::gemm_nn(n, k, m, a.data().data(), b.data().data(), out.data());
  return make_result("matmul", {n, m}, std::move(out), {a, b},
                     [a, b, n, k, m](std::span<const double> g, std::span<const std::span<double>> gi) {
                       if (!gi[0].empty()) kernels::gemm_nt(n, m, k, g.data(), b.data().data(), gi[0].data());
                       if (!gi[1].empty()) kernels::gemm_tn(n, k, m, a.data().data(), g.data(), gi[1].data());
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("add", a, b);
  auto out = copy_of(a);
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  return make_result("add", a.shape(), std::move(out), {a, b},
                     [](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (auto& sink : gi) {
                         for (std::size_t i = 0; i < sink.size(); ++i) sink[i] += g[i];
                       }
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("sub", a, b);
  auto out = copy_of(a);
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bd[i];
  return make_result("sub", a.shape(), std::move(out), {a, b},
                     [](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t i = 0; i < gi[0].size(); ++i) gi[0][i] += g[i];
                       for (std::size_t i = 0; i < gi[1].size(); ++i) gi[1][i] -= g[i];
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul", a, b);
  auto out = copy_of(a);
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
  return make_result("mul", a.shape(), std::move(out), {a, b},
                     [a, b](std::span<const double> g, std::span<const std::span<double>> gi) {
                       const auto ad = a.data();
                       const auto bd = b.data();
                       for (std::size_t i = 0; i < gi[0].size(); ++i) gi[0][i] += g[i] * bd[i];
                       for (std::size_t i = 0; i < gi[1].size(); ++i) gi[1][i] += g[i] * ad[i];
                     });
}

Tensor scale(const Tensor& a, double factor) {
  auto out = copy_of(a);
  for (auto& v : out) v *= factor;
  return make_result("scale", a.shape(), std::move(out), {a},
                     [factor](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t i = 0; i < gi[0].size(); ++i) gi[0][i] += factor * g[i];
                     });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_rank("add_bias", a, 2);
  const std::size_t n = a.dim(0), m = a.dim(1);
  if (bias.numel() != m) shape_error("add_bias", a, bias);
  auto out = copy_of(a);
  const auto bd = bias.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += bd[j];
  }
  return make_result("add_bias", a.shape(), std::move(out), {a, bias},
                     [n, m](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t i = 0; i < gi[0].size(); ++i) gi[0][i] += g[i];
                       if (!gi[1].empty()) {
                         for (std::size_t i = 0; i < n; ++i) {
                           for (std::size_t j = 0; j < m; ++j) gi[1][j] += g[i * m + j];
                         }
                       }
                     });
}

Tensor add_channel_bias(const Tensor& a, const Tensor& bias) {
  require_rank("add_channel_bias", a, 3);
  const std::size_t c = a.dim(0), plane = a.dim(1) * a.dim(2);
  if (bias.numel() != c) shape_error("add_channel_bias", a, bias);
  auto out = copy_of(a);
  const auto bd = bias.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t p = 0; p < plane; ++p) out[ch * plane + p] += bd[ch];
  }
  return make_result("add_channel_bias", a.shape(), std::move(out), {a, bias},
                     [c, plane](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t i = 0; i < gi[0].size(); ++i) gi[0][i] += g[i];
                       if (!gi[1].empty()) {
                         for (std::size_t ch = 0; ch < c; ++ch) {
                           double s = 0.0;
                           for (std::size_t p = 0; p < plane; ++p) s += g[ch * plane + p];
                           gi[1][ch] += s;
                         }
                       }
                     });
}

Tensor relu(const Tensor& a) {
  auto out = copy_of(a);
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return make_result("relu", a.shape(), std::move(out), {a},
                     [a](std::span<const double> g, std::span<const std::span<double>> gi) {
                       const auto x = a.data();
                       for (std::size_t i = 0; i < gi[0].size(); ++i) {
                         if (x[i] > 0.0) gi[0][i] += g[i];
                       }
                     });
}

Tensor sigmoid(const Tensor& a) {
  auto out = copy_of(a);
  for (auto& v : out) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  auto y = out;
  return make_result("sigmoid", a.shape(), std::move(out), {a},
                     [y = std::move(y)](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t i = 0; i < gi[0].size(); ++i) gi[0][i] += g[i] * y[i] * (1.0 - y[i]);
                     });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw InvalidArgument("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw InvalidArgument("concat: axis out of range for " + shape_string(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) shape_error("concat", parts.front(), p);
    out_shape[axis] += s[axis];
  }
  const AxisView view = axis_view(out_shape, axis);
  std::vector<double> out(element_count(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t ext = p.shape()[axis];
    const auto src = p.data();
    for (std::size_t o = 0; o < view.outer; ++o) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * ext * view.inner), ext * view.inner,
                  out.begin() + static_cast<std::ptrdiff_t>((o * view.extent + offset) * view.inner));
    }
    offset += ext;
  }
  std::vector<std::size_t> extents;
  for (const auto& p : parts) extents.push_back(p.shape()[axis]);
  return make_result("concat", out_shape, std::move(out), parts,
                     [view, offsets, extents](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t k = 0; k < gi.size(); ++k) {
                         if (gi[k].empty()) continue;
                         const std::size_t ext = extents[k];
                         for (std::size_t o = 0; o < view.outer; ++o) {
                           const double* src = g.data() + (o * view.extent + offsets[k]) * view.inner;
                           double* dst = gi[k].data() + o * ext * view.inner;
                           for (std::size_t i = 0; i < ext * view.inner; ++i) dst[i] += src[i];
                         }
                       }
                     });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (element_count(shape) != a.numel()) {
    throw InvalidArgument("reshape: cannot view " + shape_string(a.shape()) + " as " + shape_string(shape));
  }
  return make_result("reshape", std::move(shape), copy_of(a), {a},
                     [](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t i = 0; i < gi[0].size(); ++i) gi[0][i] += g[i];
                     });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& s = a.shape();
  if (axis >= s.size() || begin >= end || end > s[axis]) {
    throw InvalidArgument("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                          ") on axis " + std::to_string(axis) + " invalid for " + shape_string(s));
  }
  const AxisView view = axis_view(s, axis);
  const std::size_t ext = end - begin;
  Shape out_shape = s;
  out_shape[axis] = ext;
  std::vector<double> out(element_count(out_shape));
  const auto src = a.data();
  for (std::size_t o = 0; o < view.outer; ++o) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>((o * view.extent + begin) * view.inner),
                ext * view.inner, out.begin() + static_cast<std::ptrdiff_t>(o * ext * view.inner));
  }
  return make_result("slice", out_shape, std::move(out), {a},
                     [view, begin, ext](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t o = 0; o < view.outer; ++o) {
                         double* dst = gi[0].data() + (o * view.extent + begin) * view.inner;
                         const double* src = g.data() + o * ext * view.inner;
                         for (std::size_t i = 0; i < ext * view.inner; ++i) dst[i] += src[i];
                       }
                     });
}

Tensor max_reduce(const Tensor& a, std::size_t axis) {
  const Shape& s = a.shape();
  if (axis >= s.size()) throw InvalidArgument("max_reduce: axis out of range for " + shape_string(s));
  const AxisView view = axis_view(s, axis);
  Shape out_shape;
  for (std::size_t d = 0; d < s.size(); ++d) {
    if (d != axis) out_shape.push_back(s[d]);
  }
  if (out_shape.empty()) out_shape.push_back(1);
  std::vector<double> out(view.outer * view.inner);
  std::vector<std::size_t> argmax(out.size());
  const auto x = a.data();
  for (std::size_t o = 0; o < view.outer; ++o) {
    for (std::size_t i = 0; i < view.inner; ++i) {
      std::size_t best = 0;
      double best_v = x[o * view.extent * view.inner + i];
      for (std::size_t e = 1; e < view.extent; ++e) {
        const double v = x[(o * view.extent + e) * view.inner + i];
        if (v > best_v) {
          best_v = v;
          best = e;
        }
      }
      out[o * view.inner + i] = best_v;
      argmax[o * view.inner + i] = (o * view.extent + best) * view.inner + i;
    }
  }
  return make_result("max_reduce", out_shape, std::move(out), {a},
                     [argmax = std::move(argmax)](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t k = 0; k < argmax.size(); ++k) gi[0][argmax[k]] += g[k];
                     });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return make_result("sum", {1}, {s}, {a},
                     [](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (auto& v : gi[0]) v += g[0];
                     });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor broadcast_rows(const Tensor& row, std::size_t n) {
  const Shape& s = row.shape();
  if (!(s.size() == 1 || (s.size() == 2 && s[0] == 1)) || n == 0) {
    throw InvalidArgument("broadcast_rows: expected [m] or [1 x m], got " + shape_string(s));
  }
  const std::size_t m = row.numel();
  std::vector<double> out(n * m);
  const auto src = row.data();
  for (std::size_t i = 0; i < n; ++i) std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(i * m));
  return make_result("broadcast_rows", {n, m}, std::move(out), {row},
                     [n, m](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t j = 0; j < m; ++j) gi[0][j] += g[i * m + j];
                       }
                     });
}

Tensor repeat_rows(const Tensor& a, std::size_t r) {
  require_rank("repeat_rows", a, 2);
  if (r == 0) throw InvalidArgument("repeat_rows: zero repeat");
  const std::size_t n = a.dim(0), m = a.dim(1);
  std::vector<double> out(n * r * m);
  const auto src = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < r; ++k) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(i * m), m,
                  out.begin() + static_cast<std::ptrdiff_t>((i * r + k) * m));
    }
  }
  return make_result("repeat_rows", {n * r, m}, std::move(out), {a},
                     [n, m, r](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t k = 0; k < r; ++k) {
                           for (std::size_t j = 0; j < m; ++j) gi[0][i * m + j] += g[(i * r + k) * m + j];
                         }
                       }
                     });
}

Tensor tile_rows(const Tensor& a, std::size_t r) {
  require_rank("tile_rows", a, 2);
  if (r == 0) throw InvalidArgument("tile_rows: zero repeat");
  const std::size_t block = a.numel();
  std::vector<double> out(block * r);
  const auto src = a.data();
  for (std::size_t k = 0; k < r; ++k) std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(k * block));
  return make_result("tile_rows", {a.dim(0) * r, a.dim(1)}, std::move(out), {a},
                     [block, r](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t k = 0; k < r; ++k) {
                         for (std::size_t i = 0; i < block; ++i) gi[0][i] += g[k * block + i];
                       }
                     });
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
  require_rank("conv2d", input, 3);
  require_rank("conv2d", weight, 4);
  const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin || weight.dim(3) != k) shape_error("conv2d", input, weight);
  if (stride == 0) throw InvalidArgument("conv2d: stride must be positive");
  if (k > h + 2 * padding || k > w + 2 * padding) {
    throw InvalidArgument("conv2d: kernel " + std::to_string(k) + " larger than padded input " +
                          shape_string(input.shape()) + " (padding " + std::to_string(padding) + ")");
  }
  const kernels::ConvGeometry geo{cin, h, w, k, stride, padding, (h + 2 * padding - k) / stride + 1,
                                  (w + 2 * padding - k) / stride + 1};
  const std::size_t plane = geo.out_h * geo.out_w;
  const std::size_t patch = cin * k * k;
  std::vector<double> cols(patch * plane);
  kernels::im2col(geo, input.data().data(), cols.data());
  std::vector<double> out(cout * plane, 0.0);
  kernels::gemm_nn(cout, patch, plane, weight.data().data(), cols.data(), out.data());
  Tensor result = make_result(
      "conv2d", {cout, geo.out_h, geo.out_w}, std::move(out), {input, weight},
      [input, weight, geo, cout, patch, plane](std::span<const double> g,
                                              std::span<const std::span<double>> gi) {
        std::vector<double> cols(patch * plane);
        if (!gi[1].empty()) {
          kernels::im2col(geo, input.data().data(), cols.data());
          kernels::gemm_nt(cout, plane, patch, g.data(), cols.data(), gi[1].data());
        }
        if (!gi[0].empty()) {
          std::fill(cols.begin(), cols.end(), 0.0);
          kernels::gemm_tn(cout, patch, plane, weight.data().data(), g.data(), cols.data());
          kernels::col2im(geo, cols.data(), gi[0].data());
        }
      });
  return bias.defined() ? add_channel_bias(result, bias) : result;
}

Tensor maxpool2d(const Tensor& input, std::size_t kernel) {
  require_rank("maxpool2d", input, 3);
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (kernel == 0 || kernel > h || kernel > w) {
    throw InvalidArgument("maxpool2d: kernel " + std::to_string(kernel) + " does not fit input " +
                          shape_string(input.shape()));
  }
  const std::size_t oh = h / kernel, ow = w / kernel;
  std::vector<double> out(c * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  const auto x = input.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (ch * h + oy * kernel) * w + ox * kernel;
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::size_t idx = (ch * h + oy * kernel + ky) * w + ox * kernel + kx;
            if (x[idx] > x[best]) best = idx;
          }
        }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        out[o] = x[best];
        argmax[o] = best;
      }
    }
  }
  return make_result("maxpool2d", {c, oh, ow}, std::move(out), {input},
                     [argmax = std::move(argmax)](std::span<const double> g, std::span<const std::span<double>> gi) {
                       for (std::size_t k = 0; k < argmax.size(); ++k) gi[0][argmax[k]] += g[k];
                     });
}

Tensor deconv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride) {
  require_rank("deconv2d", input, 3);
  require_rank("deconv2d", weight, 4);
  const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t cout = weight.dim(1), k = weight.dim(2);
  if (weight.dim(0) != cin || weight.dim(3) != k) shape_error("deconv2d", input, weight);
  if (stride == 0) throw InvalidArgument("deconv2d: stride must be positive");
  const std::size_t oh = (h - 1) * stride + k, ow = (w - 1) * stride + k;
  // Transposed convolution is the adjoint of a convolution from the output
  // image onto the input grid.
  const kernels::ConvGeometry geo{cout, oh, ow, k, stride, 0, h, w};
  const std::size_t plane = h * w;
  const std::size_t patch = cout * k * k;
  std::vector<double> cols(patch * plane, 0.0);
  kernels::gemm_tn(cin, patch, plane, weight.data().data(), input.data().data(), cols.data());
  std::vector<double> out(cout * oh * ow, 0.0);
  kernels::col2im(geo, cols.data(), out.data());
  Tensor result = make_result(
      "deconv2d", {cout, oh, ow}, std::move(out), {input, weight},
      [input, weight, geo, cin, patch, plane](std::span<const double> g,
                                             std::span<const std::span<double>> gi) {
        std::vector<double> gcols(patch * plane);
        kernels::im2col(geo, g.data(), gcols.data());
        if (!gi[0].empty()) kernels::gemm_nn(cin, patch, plane, weight.data().data(), gcols.data(), gi[0].data());
        if (!gi[1].empty()) kernels::gemm_nt(cin, plane, patch, input.data().data(), gcols.data(), gi[1].data());
      });
  return bias.defined() ? add_channel_bias(result, bias) : result;
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& targets) {
  if (logits.shape() != targets.shape()) shape_error("bce_with_logits", logits, targets);
  const auto x = logits.data();
  const auto y = targets.data();
  const double inv_n = 1.0 / static_cast<double>(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += std::max(x[i], 0.0) - x[i] * y[i] + std::log1p(std::exp(-std::abs(x[i])));
  }
  const Tensor target_const = targets.detach();
  return make_result("bce_with_logits", {1}, {total * inv_n}, {logits},
                     [logits, target_const, inv_n](std::span<const double> g,
                                                   std::span<const std::span<double>> gi) {
                       const auto x = logits.data();
                       const auto y = target_const.data();
                       for (std::size_t i = 0; i < x.size(); ++i) {
                         const double s = x[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-x[i]))
                                                      : std::exp(x[i]) / (1.0 + std::exp(x[i]));
                         gi[0][i] += g[0] * (s - y[i]) * inv_n;
                       }
                     });
}

}  // namespace gpr::ad
