#include "gpr/gprnet/model.hpp"

#include <algorithm>
#include <string>

#include "gpr/autodiff/ops.hpp"
#include "gpr/cloud/metrics.hpp"
#include "gpr/common/error.hpp"
#include "gpr/common/random.hpp"

namespace gpr::gprnet {

using ad::Tensor;

namespace {

constexpr std::size_t kPointWidth[3] = {64, 128, 256};
constexpr std::size_t kLocalRows[3] = {256, 128, 64};

// Offset of block (i, j) = [f_i | g_j] inside the all-pairs feature.
std::size_t pair_offset(std::size_t i, std::size_t j) {
  std::size_t off = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      if (a == i && b == j) return off;
      off += kPointWidth[a] + kPointWidth[b];
    }
  }
  return off;
}

std::size_t scaled(std::size_t width, std::size_t divisor) { return std::max<std::size_t>(width / divisor, 1); }

}  // namespace

std::size_t pair_feature_width() { return pair_offset(3, 3); }

GprNetModel::GprNetModel(const GprNetConfig& config) : config_(config) {
  const std::size_t k = config.width_divisor;
  if (k == 0) throw InvalidArgument("width divisor must be positive");
  if (!(config.patch_delta > 0.0)) throw InvalidArgument("folding patch delta must be positive");
  Rng rng = make_rng(config.seed, 0);

  std::size_t in = 3;
  for (int i = 0; i < 3; ++i) {
    point_mlp_[i] = ad::Linear::init(in, kPointWidth[i], rng);
    in = kPointWidth[i];
  }
  const std::size_t hidden = scaled(512, k);
  pair_hidden_ = ad::Linear::init(pair_feature_width(), hidden, rng);
  pair_out_ = ad::Linear::init(hidden, kGlobalFeature, rng);

  in = kGlobalFeature;
  for (int i = 0; i < 3; ++i) {
    local_fc_[i] = ad::Linear::init(in, kLocalRows[i], rng);
    in = kLocalRows[i];
    local_expand_[i] = ad::Linear::init(kLocalRows[i], 3 * kLocalRows[i], rng);
    global_mlp_[i] = ad::SharedMlp(kGlobalFeature, {scaled(1024, k), 3 * kLocalRows[i]}, rng, false);
  }

  const std::size_t code = scaled(128, k), fold = scaled(256, k);
  fold_code_ = ad::Linear::init(kGlobalFeature, code, rng);
  fold_in_seed_ = ad::Linear::init(3, fold, rng);
  fold_in_grid_ = ad::Linear::init(2, fold, rng);
  fold_in_code_ = ad::Linear::init(code, fold, rng);
  fold_tail_ = ad::SharedMlp(fold, {fold, 3}, rng, false);

  const double d = config.patch_delta;
  std::vector<double> grid;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      grid.push_back(a * d);
      grid.push_back(b * d);
    }
  }
  grid_ = Tensor::from_data({kPatchPoints, 2}, std::move(grid));
}

Tensor GprNetModel::encode(const Tensor& points, EncoderTrace* trace) const {
  if (points.shape().size() != 2 || points.dim(1) != 3 || points.dim(0) != kInputPoints) {
    throw InvalidArgument("encoder expects [1500 x 3] points, got " + ad::shape_string(points.shape()) +
                          "; resample the cloud first");
  }
  const std::size_t m = points.dim(0);
  Tensor f[3], g[3];
  Tensor x = points;
  for (int i = 0; i < 3; ++i) {
    f[i] = ad::relu(point_mlp_[i].forward(x));
    g[i] = ad::max_reduce(f[i], 0);
    x = f[i];
  }

  // [f_i | g_j] rows times W equals f_i (sum_j W_ij^f) + g_j (sum_i W_ij^g),
  // which avoids materializing the 2688-channel matrix.
  const Tensor& w = pair_hidden_.weight;
  Tensor per_point, pooled;
  for (std::size_t i = 0; i < 3; ++i) {
    Tensor a;
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t off = pair_offset(i, j);
      Tensor blk = ad::slice(w, 0, off, off + kPointWidth[i]);
      a = a.defined() ? ad::add(a, blk) : blk;
    }
    Tensor t = ad::matmul(f[i], a);
    per_point = per_point.defined() ? ad::add(per_point, t) : t;
  }
  for (std::size_t j = 0; j < 3; ++j) {
    Tensor b;
    for (std::size_t i = 0; i < 3; ++i) {
      const std::size_t off = pair_offset(i, j) + kPointWidth[i];
      Tensor blk = ad::slice(w, 0, off, off + kPointWidth[j]);
      b = b.defined() ? ad::add(b, blk) : blk;
    }
    Tensor t = ad::matmul(ad::reshape(g[j], {1, kPointWidth[j]}), b);
    pooled = pooled.defined() ? ad::add(pooled, t) : t;
  }
  const Tensor h = ad::relu(ad::add_bias(ad::add(per_point, ad::broadcast_rows(pooled, m)), pair_hidden_.bias));
  const Tensor v = ad::max_reduce(pair_out_.forward(h), 0);

  if (trace) {
    for (int i = 0; i < 3; ++i) {
      trace->f[i] = f[i];
      trace->g[i] = g[i];
    }
  }
  return v;
}

Tensor GprNetModel::decode(const Tensor& v, DecoderTrace* trace) const {
  const auto& vs = v.shape();
  const bool vector_like = vs.size() == 1 || (vs.size() == 2 && vs[0] == 1);
  if (v.numel() != kGlobalFeature || !vector_like) {
    throw InvalidArgument("decoder expects an 896-dim feature, got " + ad::shape_string(v.shape()));
  }
  const Tensor row = ad::reshape(v, {1, kGlobalFeature});

  Tensor local[3], global[3];
  Tensor a = row;
  for (int i = 0; i < 3; ++i) {
    a = ad::relu(local_fc_[i].forward(a));
    local[i] = ad::reshape(local_expand_[i].forward(a), {kLocalRows[i], 3});
    global[i] = ad::reshape(global_mlp_[i].forward(row), {kLocalRows[i], 3});
  }
  const Tensor seeds = ad::concat({local[0], local[1], local[2], global[0], global[1], global[2]}, 0);

  // First folding layer over [seed | grid | code], split by input block.
  const Tensor code = ad::relu(fold_code_.forward(row));
  const Tensor by_seed = ad::repeat_rows(fold_in_seed_.forward(seeds), kPatchPoints);
  const Tensor by_grid = ad::tile_rows(ad::matmul(grid_, fold_in_grid_.weight), kSeedCount);
  const Tensor by_code = ad::broadcast_rows(ad::matmul(code, fold_in_code_.weight), kOutputPoints);
  const Tensor h = ad::relu(ad::add(ad::add(by_seed, by_grid), by_code));
  const Tensor offsets = fold_tail_.forward(h);
  const Tensor out = ad::add(ad::repeat_rows(seeds, kPatchPoints), offsets);

  if (trace) {
    for (int i = 0; i < 3; ++i) {
      trace->local[i] = local[i];
      trace->global[i] = global[i];
    }
    trace->seeds = seeds;
    trace->offsets = offsets;
  }
  return out;
}

cloud::PointCloud GprNetModel::complete(const cloud::PointCloud& sparse) const {
  return cloud::cloud_from_tensor(forward(cloud::tensor_from_cloud(sparse)));
}

ad::NamedTensors GprNetModel::parameters() const {
  ad::NamedTensors out;
  for (int i = 0; i < 3; ++i) point_mlp_[i].collect("enc.point." + std::to_string(i), out);
  pair_hidden_.collect("enc.pair.0", out);
  pair_out_.collect("enc.pair.1", out);
  for (int i = 0; i < 3; ++i) {
    const std::string n = std::to_string(i);
    local_fc_[i].collect("dec.local." + n + ".fc", out);
    local_expand_[i].collect("dec.local." + n + ".expand", out);
    global_mlp_[i].collect("dec.global." + n, out);
  }
  fold_code_.collect("dec.fold.code", out);
  fold_in_seed_.collect("dec.fold.in_seed", out);
  out.emplace_back("dec.fold.in_grid.weight", fold_in_grid_.weight);
  out.emplace_back("dec.fold.in_code.weight", fold_in_code_.weight);
  fold_tail_.collect("dec.fold.tail", out);
  return out;
}

std::vector<Tensor> GprNetModel::parameter_list() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : parameters()) out.push_back(t);
  return out;
}

void GprNetModel::zero_folding_output() {
  auto& last = fold_tail_.layers().back();
  for (Tensor* t : {&last.weight, &last.bias}) {
    auto d = t->mutable_data();
    std::fill(d.begin(), d.end(), 0.0);
  }
}

}  // namespace gpr::gprnet
