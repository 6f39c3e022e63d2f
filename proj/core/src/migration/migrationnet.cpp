#include "gpr/migration/migrationnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gpr/autodiff/checkpoint.hpp"
#include "gpr/autodiff/ops.hpp"
#include "gpr/autodiff/optim.hpp"
#include "gpr/common/error.hpp"
#include "gpr/common/random.hpp"
#include "gpr/scene/forward.hpp"

namespace gpr::migration {

using ad::Tensor;

namespace {

ad::Conv2d conv3(std::size_t in, std::size_t out, Rng& rng) { return ad::Conv2d::init(in, out, 3, 1, rng); }

}  // namespace

Tensor MigrationNetModel::Group::forward(const Tensor& x) const {
  return ad::relu(b.forward(ad::relu(a.forward(x))));
}

MigrationNetModel::MigrationNetModel(const MigrationNetConfig& config) : config_(config) {
  const std::size_t w = config.width;
  if (w < 8 || w % 8 != 0) {
    throw InvalidArgument("MigrationNet width must be a positive multiple of 8, got " + std::to_string(w));
  }
  Rng rng = make_rng(config.seed, 0);
  auto group = [&](std::size_t in, std::size_t mid, std::size_t out) {
    return Group{conv3(in, mid, rng), conv3(mid, out, rng)};
  };
  // Encoder: each branch ends at w channels on the 1/8 grid.
  top_ = group(1, w / 2, w);
  mid_[0] = group(1, w / 4, w / 2);
  mid_[1] = group(w / 2, w / 2, w);
  bottom_[0] = group(1, w / 8, w / 4);
  bottom_[1] = group(w / 4, w / 4, w / 2);
  bottom_[2] = group(w / 2, w / 2, w);

  // Decoder input widths include the concatenated skips.
  dec_[0] = {group(3 * w, w, w), ad::Deconv2d::init(w, w, 2, rng)};
  dec_[1] = {group(3 * w, w / 2, w / 2), ad::Deconv2d::init(w / 2, w / 2, 2, rng)};
  dec_[2] = {group(w, w / 4, w / 4), ad::Deconv2d::init(w / 4, w / 4, 2, rng)};
  dec_[3] = {group(2 * w, w / 4, w / 4), std::nullopt};
  refine_ = group(w / 4, w / 4, w / 4);
  head_ = ad::Conv2d::init(w / 4, 1, 1, 0, rng);
}

Tensor MigrationNetModel::logits(const Tensor& input, MigrationNetTrace* trace) const {
  if (input.shape().size() != 3 || input.dim(0) != 1) {
    throw InvalidArgument("MigrationNet expects a [1 x H x W] input, got " + ad::shape_string(input.shape()));
  }
  const std::size_t h = input.dim(1), w = input.dim(2);
  if (h % kMigrationPooling != 0 || w % kMigrationPooling != 0) {
    auto up = [](std::size_t n) { return (n + kMigrationPooling - 1) / kMigrationPooling * kMigrationPooling; };
    throw InvalidArgument("MigrationNet input " + std::to_string(h) + "x" + std::to_string(w) +
                          " is not divisible by 8; pad to " + std::to_string(up(h)) + "x" + std::to_string(up(w)));
  }

  const Tensor top1 = top_.forward(input);
  const Tensor top_out = ad::maxpool2d(top1, 8);

  const Tensor mid1 = mid_[0].forward(input);
  const Tensor mid2 = mid_[1].forward(ad::maxpool2d(mid1, 4));
  const Tensor mid_out = ad::maxpool2d(mid2, 2);

  const Tensor bot1 = bottom_[0].forward(input);
  const Tensor bot2 = bottom_[1].forward(ad::maxpool2d(bot1, 2));
  const Tensor bot3 = bottom_[2].forward(ad::maxpool2d(bot2, 2));
  const Tensor bot_out = ad::maxpool2d(bot3, 2);

  const Tensor fused = ad::concat({top_out, mid_out, bot_out}, 0);

  Tensor x = dec_[0].up->forward(dec_[0].convs.forward(fused));                        // 1/4
  x = dec_[1].up->forward(dec_[1].convs.forward(ad::concat({x, mid2, bot3}, 0)));      // 1/2
  x = dec_[2].up->forward(dec_[2].convs.forward(ad::concat({x, bot2}, 0)));            // 1/1
  x = dec_[3].convs.forward(ad::concat({x, top1, mid1, bot1}, 0));
  x = refine_.forward(x);
  Tensor out = head_.forward(x);

  if (trace) {
    trace->branch_outputs = {top_out, mid_out, bot_out};
    trace->fused = fused;
    trace->logits = out;
  }
  return out;
}

ad::NamedTensors MigrationNetModel::parameters() const {
  ad::NamedTensors out;
  auto group = [&](const std::string& name, const Group& g) {
    g.a.collect(name + ".conv1", out);
    g.b.collect(name + ".conv2", out);
  };
  group("enc.top.0", top_);
  for (int i = 0; i < 2; ++i) group("enc.mid." + std::to_string(i), mid_[i]);
  for (int i = 0; i < 3; ++i) group("enc.bottom." + std::to_string(i), bottom_[i]);
  for (int i = 0; i < 4; ++i) {
    group("dec." + std::to_string(i), dec_[i].convs);
    if (dec_[i].up) dec_[i].up->collect("dec." + std::to_string(i) + ".up", out);
  }
  group("dec.4", refine_);
  head_.collect("head", out);
  return out;
}

std::vector<Tensor> MigrationNetModel::parameter_list() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : parameters()) out.push_back(t);
  return out;
}

Tensor normalize_bscan(const scene::BScan& bscan) {
  bscan.validate();
  std::vector<double> v(bscan.amplitude.begin(), bscan.amplitude.end());
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double low = *lo, span = *hi - *lo;
  for (double& x : v) x = span > 0.0 ? (x - low) / span : 0.0;
  return Tensor::from_data({1, bscan.samples, bscan.traces}, std::move(v));
}

std::vector<double> migrationnet_forward(const MigrationNetModel& model, const scene::BScan& bscan) {
  const Tensor p = ad::sigmoid(model.logits(normalize_bscan(bscan)));
  return {p.data().begin(), p.data().end()};
}

scene::CrossSection probabilities_to_cross_section(const std::vector<double>& probabilities,
                                                   const scene::SectionGeometry& geometry) {
  if (probabilities.size() != geometry.rows * geometry.cols) {
    throw InvalidArgument("probability grid has " + std::to_string(probabilities.size()) + " cells, geometry " +
                          std::to_string(geometry.rows) + "x" + std::to_string(geometry.cols));
  }
  scene::CrossSection cs{geometry, std::vector<std::uint8_t>(probabilities.size())};
  for (std::size_t i = 0; i < probabilities.size(); ++i) cs.mask[i] = probabilities[i] >= 0.5 ? 1 : 0;
  return cs;
}

namespace {

void check_pair(std::size_t a, std::size_t b) {
  if (a != b || a == 0) {
    throw InvalidArgument("prediction has " + std::to_string(a) + " cells but mask has " + std::to_string(b));
  }
}

}  // namespace

double binary_cross_entropy(const std::vector<double>& probabilities, const std::vector<std::uint8_t>& mask) {
  check_pair(probabilities.size(), mask.size());
  constexpr double kEps = 1e-12;
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double p = std::clamp(probabilities[i], kEps, 1.0 - kEps);
    total -= mask[i] ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(mask.size());
}

double pixel_accuracy(const std::vector<double>& probabilities, const std::vector<std::uint8_t>& mask) {
  check_pair(probabilities.size(), mask.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) hits += (probabilities[i] >= 0.5) == (mask[i] != 0);
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

scene::BScan resample_to_section(const scene::BScan& bscan, const scene::SectionGeometry& geometry,
                                 double permittivity) {
  bscan.validate();
  if (!(geometry.cell > 0.0) || geometry.rows == 0 || geometry.cols == 0) {
    throw InvalidArgument("section grid needs positive size and cell");
  }
  const double v = scene::wave_speed(permittivity);
  const Vec3 dir = survey::axis_direction(geometry.pose.axis);
  std::vector<double> lateral(bscan.traces);
  for (std::size_t k = 0; k < bscan.traces; ++k) lateral[k] = dot(bscan.poses[k].position - geometry.pose.origin, dir);
  for (std::size_t k = 1; k < bscan.traces; ++k) {
    if (!(lateral[k] > lateral[k - 1])) throw InvalidArgument("trace positions must increase along the section axis");
  }

  scene::BScan out;
  out.samples = geometry.rows;
  out.traces = geometry.cols;
  out.dt_ns = 2.0 * geometry.cell / v;
  out.trace_spacing = geometry.cell;
  out.poses.resize(geometry.cols);
  out.amplitude.assign(geometry.rows * geometry.cols, 0.0F);
  const double last_sample = static_cast<double>(bscan.samples - 1);

  auto sample = [&](std::size_t k, double pos) -> double {
    if (pos > last_sample) return 0.0;
    const auto i0 = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i0);
    const double a = bscan.at(i0, k);
    return i0 + 1 < bscan.samples ? a + frac * (bscan.at(i0 + 1, k) - a) : a;
  };

  for (std::size_t c = 0; c < geometry.cols; ++c) {
    const double x = static_cast<double>(c) * geometry.cell;
    out.poses[c].position = geometry.pose.origin + x * dir;
    if (x < lateral.front() - 1e-9 || x > lateral.back() + 1e-9) continue;
    const auto hi = static_cast<std::size_t>(std::lower_bound(lateral.begin(), lateral.end(), x) - lateral.begin());
    const std::size_t k1 = std::min(hi, bscan.traces - 1);
    const std::size_t k0 = k1 == 0 ? 0 : k1 - 1;
    const double w = k1 == k0 ? 0.0 : std::clamp((x - lateral[k0]) / (lateral[k1] - lateral[k0]), 0.0, 1.0);
    for (std::size_t r = 0; r < geometry.rows; ++r) {
      const double pos = static_cast<double>(r) * out.dt_ns / bscan.dt_ns;
      const double a = sample(k0, pos), b = sample(k1, pos);
      out.at(r, c) = static_cast<float>(a + w * (b - a));
    }
  }
  return out;
}

scene::CrossSection migrate_with_network(const MigrationNetModel& model, const scene::BScan& bscan,
                                         const scene::SectionGeometry& geometry, double permittivity) {
  return probabilities_to_cross_section(migrationnet_forward(model, resample_to_section(bscan, geometry, permittivity)),
                                        geometry);
}

MigrationSample make_migration_sample(const scene::PipeScene& scene, const Vec3& line_start, survey::ScanAxis axis,
                                      std::size_t size, double cell, double frequency_ghz) {
  if (size == 0 || !(cell > 0.0)) throw InvalidArgument("migration sample needs size > 0 and cell > 0");
  const Vec3 dir = survey::axis_direction(axis);
  std::vector<survey::SurveyPose> poses(size);
  for (std::size_t k = 0; k < size; ++k) poses[k].position = line_start + (static_cast<double>(k) * cell) * dir;

  scene::ForwardConfig fwd;
  fwd.samples = size;
  fwd.dt_ns = 2.0 * cell / scene::wave_speed(scene.permittivity);
  fwd.center_frequency_ghz = frequency_ghz;

  scene::SectionGeometry geom;
  geom.rows = size;
  geom.cols = size;
  geom.cell = cell;
  geom.pose = {line_start, axis};
  return {scene::synthesize_bscan(scene, poses, cell, fwd), scene::ground_truth_cross_section(scene, geom)};
}

MigrationTrainLog train_migrationnet(MigrationNetModel& model, const std::vector<MigrationSample>& dataset,
                                     const MigrationTrainConfig& config) {
  if (dataset.empty()) throw InvalidArgument("training set is empty");
  std::vector<Tensor> inputs, targets;
  for (const auto& s : dataset) {
    if (s.bscan.samples != s.target.rows() || s.bscan.traces != s.target.cols()) {
      throw InvalidArgument("B-scan " + std::to_string(s.bscan.samples) + "x" + std::to_string(s.bscan.traces) +
                            " does not match mask " + std::to_string(s.target.rows()) + "x" +
                            std::to_string(s.target.cols()));
    }
    inputs.push_back(normalize_bscan(s.bscan));
    targets.push_back(Tensor::from_data({1, s.target.rows(), s.target.cols()},
                                        std::vector<double>(s.target.mask.begin(), s.target.mask.end())));
  }

  ad::Adam adam(model.parameter_list(), {config.learning_rate});
  Rng rng = make_rng(config.seed, 1);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  auto accuracy = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const Tensor p = ad::sigmoid(model.logits(inputs[i]));
      acc += pixel_accuracy({p.data().begin(), p.data().end()}, dataset[i].target.mask);
    }
    return acc / static_cast<double>(dataset.size());
  };

  MigrationTrainLog log;
  double epoch_sum = 0.0;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const std::size_t pos = step % dataset.size();
    if (pos == 0 && config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    const std::size_t i = order[pos];

    adam.zero_grad();
    const Tensor loss = ad::bce_with_logits(model.logits(inputs[i]), targets[i]);
    const double value = loss.item();
    if (!std::isfinite(value)) throw NumericalError("MigrationNet loss became non-finite at step " + std::to_string(step));
    loss.backward();
    adam.step();

    log.step_loss.push_back(value);
    log.steps_run = step + 1;
    epoch_sum += value;
    if (pos + 1 == dataset.size()) {
      log.epoch_loss.push_back(epoch_sum / static_cast<double>(dataset.size()));
      epoch_sum = 0.0;
      if (config.checkpoint) ad::save_checkpoint(model.parameters(), *config.checkpoint);
    }
    if (config.target_accuracy > 0.0 && config.eval_interval > 0 && (step + 1) % config.eval_interval == 0) {
      log.final_accuracy = accuracy();
      if (log.final_accuracy > config.target_accuracy) return log;
    }
  }
  log.final_accuracy = accuracy();
  return log;
}

}  // namespace gpr::migration
