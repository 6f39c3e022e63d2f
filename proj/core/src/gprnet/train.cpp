#include "gpr/gprnet/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "gpr/autodiff/checkpoint.hpp"
#include "gpr/autodiff/ops.hpp"
#include "gpr/autodiff/optim.hpp"
#include "gpr/cloud/metrics.hpp"
#include "gpr/common/error.hpp"
#include "gpr/common/random.hpp"

namespace gpr::gprnet {

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidArgument("epochs must be positive");
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw InvalidArgument("decay factor must lie in (0, 1]");
  if (decay_interval == 0) throw InvalidArgument("decay interval must be positive");
}

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_metrics(const std::filesystem::path& path, const std::vector<EpochRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "step,train_cd,val_cd,lr\n";
  for (const auto& r : rows) out << r.step << ',' << fmt(r.train_cd) << ',' << fmt(r.val_cd) << ',' << fmt(r.lr) << '\n';
}

}  // namespace

double mean_chamfer(const GprNetModel& model, const std::vector<Sample>& samples) {
  if (samples.empty()) throw InvalidArgument("cannot average over an empty set");
  double total = 0.0;
  for (const auto& s : samples) total += cloud::chamfer_distance(model.complete(s.sparse), s.dense).value;
  return total / static_cast<double>(samples.size());
}

TrainReport train_gprnet(GprNetModel& model, const std::vector<Sample>& train, const std::vector<Sample>& validation,
                         const TrainConfig& config, const TrainOutputs& outputs) {
  config.validate();
  if (train.empty()) throw InvalidArgument("training set is empty");
  std::vector<ad::Tensor> inputs;
  for (const auto& s : train) {
    if (s.sparse.size() != kInputPoints || s.dense.empty()) {
      throw InvalidArgument("training pairs need 1500 sparse points and a nonempty dense cloud");
    }
    inputs.push_back(cloud::tensor_from_cloud(s.sparse));
  }

  ad::Adam adam(model.parameter_list(), {config.learning_rate});
  const ad::StepDecay decay{config.decay_factor, config.decay_interval};
  Rng rng = make_rng(config.seed, 0);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  report.best_val_cd = std::numeric_limits<double>::infinity();
  std::size_t step = 0;
  bool done = false;
  for (std::size_t epoch = 0; epoch < config.epochs && !done; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - begin);
      adam.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t i = order[b];
        const ad::Tensor loss = ad::scale(cloud::chamfer_loss(model.forward(inputs[i]), train[i].dense), weight);
        const double value = loss.item();
        if (!std::isfinite(value)) {
          throw NumericalError("GPRNet loss became non-finite at step " + std::to_string(step));
        }
        loss.backward();
        batch_loss += value;
      }
      adam.set_learning_rate(decay.at(config.learning_rate, step));
      adam.step();
      ++step;
      report.step_loss.push_back(batch_loss);
      loss_sum += batch_loss;
      ++batches;
      if (config.max_steps && step >= config.max_steps) {
        done = true;
        break;
      }
    }

    EpochRow row;
    row.step = step;
    row.train_cd = loss_sum / static_cast<double>(batches);
    row.val_cd = validation.empty() ? std::nan("") : mean_chamfer(model, validation);
    row.lr = decay.at(config.learning_rate, step);
    report.epochs.push_back(row);

    const double score = validation.empty() ? row.train_cd : row.val_cd;
    if (score < report.best_val_cd) {
      report.best_val_cd = score;
      report.best_epoch = epoch;
      if (outputs.best_checkpoint) ad::save_checkpoint(model.parameters(), *outputs.best_checkpoint);
    }
    if (outputs.metrics_csv) write_metrics(*outputs.metrics_csv, report.epochs);
  }
  return report;
}

EvalReport evaluate(const Predictor& predict, const std::vector<Sample>& test) {
  if (test.empty()) throw InvalidArgument("test set is empty");
  EvalReport report;
  double cd = 0.0, l1 = 0.0;
  for (const auto& s : test) {
    const cloud::PointCloud pred = predict(s);
    SampleMetrics m{cloud::chamfer_distance(pred, s.dense).value, cloud::l1_nn_distance(pred, s.dense)};
    cd += m.cd;
    l1 += m.l1;
    report.samples.push_back(m);
  }
  const auto n = static_cast<double>(test.size());
  report.cd_x1e3 = cd / n * 1e3;
  report.l1_x100 = l1 / n * 100.0;
  return report;
}

EvalReport evaluate(const GprNetModel& model, const std::vector<Sample>& test) {
  return evaluate([&model](const Sample& s) { return model.complete(s.sparse); }, test);
}

Predictor perfect_stub() {
  return [](const Sample& s) { return s.dense; };
}

}  // namespace gpr::gprnet
