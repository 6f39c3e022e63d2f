#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "gpr/autodiff/checkpoint.hpp"
#include "gpr/autodiff/ops.hpp"
#include "gpr/autodiff/optim.hpp"
#include "gpr/cloud/metrics.hpp"
#include "gpr/common/error.hpp"
#include "gpr/common/random.hpp"
#include "gpr/gprnet/dataset.hpp"
#include "gpr/gprnet/model.hpp"
#include "gpr/gprnet/train.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace gpr;
using namespace gpr::gprnet;
using ad::Tensor;

namespace {

Tensor random_points(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return Tensor::from_data({n, 3}, gpr::testing::random_values(3 * n, rng));
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& order) {
  std::vector<double> out;
  for (auto i : order) out.insert(out.end(), x.data().begin() + 3 * i, x.data().begin() + 3 * i + 3);
  return Tensor::from_data({order.size(), 3}, std::move(out));
}

ad::Tensor param(const GprNetModel& m, const std::string& name) {
  for (auto& [n, t] : m.parameters())
    if (n == name) return t;
  FAIL("no parameter " << name);
  return {};
}

}  // namespace

TEST_CASE("encoder shapes and the all-pairs width") {
  const GprNetModel model;
  EncoderTrace trace;
  const Tensor v = model.encode(random_points(1500, 1), &trace);
  CHECK(v.shape() == ad::Shape{896});
  CHECK(trace.f[0].shape() == ad::Shape{1500, 64});
  CHECK(trace.f[1].shape() == ad::Shape{1500, 128});
  CHECK(trace.f[2].shape() == ad::Shape{1500, 256});
  CHECK(trace.g[0].numel() == 64);
  CHECK(trace.g[1].numel() == 128);
  CHECK(trace.g[2].numel() == 256);
  // Three f_i against three g_j: 3 * (64+128+256) + 3 * (64+128+256).
  CHECK(pair_feature_width() == 2688);

  CHECK_THROWS_AS(model.encode(random_points(1499, 1)), InvalidArgument);
  CHECK_THROWS_AS(model.encode(random_points(2048, 1)), InvalidArgument);
  CHECK_THROWS_AS(model.decode(Tensor::zeros({895})), InvalidArgument);
  CHECK_THROWS_AS(model.decode(Tensor::zeros({2, 448})), InvalidArgument);
}

TEST_CASE("encoder is invariant to point order") {
  const GprNetModel model({4, 0.01, 9});
  const Tensor x = random_points(1500, 2);
  std::vector<std::size_t> order(1500);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(5);
  std::shuffle(order.begin(), order.end(), rng);
  const Tensor a = model.encode(x), b = model.encode(permute_rows(x, order));
  double worst = 0.0;
  for (std::size_t i = 0; i < 896; ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  CHECK(worst < 1e-9);
}

TEST_CASE("encoder sees only the support of the input multiset") {
  const GprNetModel model({4, 0.01, 3});
  const Tensor support = random_points(250, 7);
  std::vector<std::size_t> even, skewed;
  for (std::size_t i = 0; i < 250; ++i) even.insert(even.end(), 6, i);
  for (std::size_t i = 0; i < 250; ++i) skewed.insert(skewed.end(), i < 125 ? 4 : 8, i);
  REQUIRE(skewed.size() == 1500);
  Rng rng(8);
  std::shuffle(skewed.begin(), skewed.end(), rng);
  const Tensor a = model.encode(permute_rows(support, even));
  const Tensor b = model.encode(permute_rows(support, skewed));
  for (std::size_t i = 0; i < 896; ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("decoder shapes and seed census") {
  const GprNetModel model({4, 0.01, 4});
  Rng rng(3);
  DecoderTrace trace;
  const Tensor out = model.decode(Tensor::from_data({896}, gpr::testing::random_values(896, rng)), &trace);
  CHECK(out.shape() == ad::Shape{8064, 3});
  const std::size_t local[3] = {256, 128, 64};
  std::size_t rows = 0;
  for (int i = 0; i < 3; ++i) {
    CHECK(trace.local[i].shape() == ad::Shape{local[i], 3});
    CHECK(trace.global[i].shape() == ad::Shape{local[i], 3});
    rows += 2 * local[i];
  }
  CHECK(rows == 896);
  CHECK(trace.seeds.shape() == ad::Shape{896, 3});
  CHECK(trace.offsets.shape() == ad::Shape{8064, 3});

  for (double fill : {0.0, 1e3, -2.5}) CHECK(model.decode(Tensor::full({896}, fill)).shape() == ad::Shape{8064, 3});
}

TEST_CASE("zeroed folding head repeats every seed nine times") {
  GprNetModel model({4, 0.01, 6});
  model.zero_folding_output();
  DecoderTrace trace;
  const Tensor out = model.forward(random_points(1500, 4));
  (void)model.decode(model.encode(random_points(1500, 4)), &trace);
  for (std::size_t s = 0; s < 896; ++s)
    for (std::size_t k = 0; k < 9; ++k)
      for (std::size_t c = 0; c < 3; ++c) CHECK(out.data()[(s * 9 + k) * 3 + c] == trace.seeds.data()[s * 3 + c]);
}

TEST_CASE("folding patches are spread by the 3x3 grid") {
  // Only the grid term varies inside a patch, so the nine offsets of one seed differ.
  const GprNetModel model({4, 0.01, 6});
  DecoderTrace trace;
  (void)model.decode(model.encode(random_points(1500, 4)), &trace);
  const auto off = trace.offsets.data();
  std::size_t distinct = 0;
  for (std::size_t k = 1; k < 9; ++k) distinct += off[k * 3] != off[0] || off[k * 3 + 1] != off[1];
  CHECK(distinct > 0);
}

TEST_CASE("parameter census and checkpoint size") {
  const GprNetModel model;  // divisor 4
  auto lin = [](std::size_t i, std::size_t o, bool bias = true) { return i * o + (bias ? o : 0); };
  std::size_t expected = lin(3, 64) + lin(64, 128) + lin(128, 256);
  expected += lin(2688, 128) + lin(128, 896);
  expected += lin(896, 256) + lin(256, 128) + lin(128, 64);
  for (std::size_t a : {256, 128, 64}) expected += lin(a, 3 * a) + lin(896, 256) + lin(256, 3 * a);
  expected += lin(896, 32);                                // folding code
  expected += lin(3, 64) + lin(2, 64, false) + lin(32, 64, false);
  expected += lin(64, 64) + lin(64, 3);

  std::size_t total = 0;
  std::uint64_t bytes = 10;
  for (const auto& [name, t] : model.parameters()) {
    total += t.numel();
    bytes += 2 + name.size() + 2 + 4 * t.shape().size() + 8 * t.numel();
  }
  CHECK(total == expected);
  CHECK(ad::checkpoint_size(model.parameters()) == bytes);

  const auto path = std::filesystem::temp_directory_path() / "gpr_gprnet_census.gprn";
  ad::save_checkpoint(model.parameters(), path);
  CHECK(std::filesystem::file_size(path) == bytes);
  GprNetModel other({4, 0.01, 77});
  ad::assign_parameters(other.parameters(), ad::load_checkpoint(path));
  const Tensor x = random_points(1500, 9);
  const auto a = model.forward(x), b = other.forward(x);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  std::filesystem::remove(path);
}

TEST_CASE("end-to-end Chamfer gradient matches finite differences") {
  const GprNetModel model({4, 0.01, 11});
  const Tensor x = random_points(1500, 12);
  Rng rng(13);
  const auto gt = gpr::testing::random_cloud(8064, rng, -0.5, 0.5);
  auto loss = [&] { return cloud::chamfer_loss(model.forward(x), gt); };
  for (const char* name : {"enc.point.0.weight", "enc.pair.0.weight", "dec.local.0.expand.weight",
                           "dec.fold.tail.1.weight"}) {
    CAPTURE(name);
    Tensor w = param(model, name);
    std::vector<std::size_t> idx;
    for (int k = 0; k < 3; ++k) idx.push_back(rng() % w.numel());
    const auto r = gpr::testing::check_gradient(loss, w, idx, 1e-6);
    CAPTURE(r.analytic);
    CAPTURE(r.numeric);
    CHECK(r.max_rel < 1e-4);
  }
}

TEST_CASE("split convention and learning-rate decay") {
  const auto s = split_dataset(1628, 100, 150, 1);
  CHECK(s.validation.size() == 100);
  CHECK(s.test.size() == 150);
  CHECK(s.train.size() == 1378);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.validation.begin(), s.validation.end());
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  CHECK(split_dataset(1628, 100, 150, 1).test == s.test);
  CHECK(split_dataset(1628, 100, 150, 2).test != s.test);
  CHECK_THROWS_AS(split_dataset(200, 100, 150, 1), InvalidArgument);

  const TrainConfig cfg;
  CHECK(cfg.learning_rate == 5e-5);
  CHECK(cfg.batch_size == 16);
  const ad::StepDecay decay{cfg.decay_factor, cfg.decay_interval};
  CHECK(decay.at(cfg.learning_rate, 0) == cfg.learning_rate);
  CHECK(decay.at(cfg.learning_rate, 49999) == cfg.learning_rate);
  CHECK(decay.at(cfg.learning_rate, 50000) == doctest::Approx(0.7 * cfg.learning_rate).epsilon(1e-15));

  using Mutation = void (*)(TrainConfig&);
  for (Mutation bad : {+[](TrainConfig& c) { c.epochs = 0; }, +[](TrainConfig& c) { c.batch_size = 0; },
                   +[](TrainConfig& c) { c.learning_rate = -1; }, +[](TrainConfig& c) { c.decay_factor = 0; }}) {
    TrainConfig c;
    bad(c);
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
  }
}

TEST_CASE("perfect stub scores zero and evaluation is deterministic") {
  SurveyConfig survey;
  const auto data = make_dataset(3, SparseSource::GroundTruth, survey, 21);
  REQUIRE(data.size() == 3);
  for (const auto& s : data) {
    CHECK(s.sparse.size() == 1500);
    CHECK(s.dense.size() == 8064);
  }
  const auto perfect = evaluate(perfect_stub(), data);
  CHECK(perfect.cd_x1e3 == 0.0);
  CHECK(perfect.l1_x100 == 0.0);
  CHECK(perfect.samples.size() == 3);

  const GprNetModel model({4, 0.01, 2});
  const auto a = evaluate(model, data), b = evaluate(model, data);
  CHECK(a.cd_x1e3 == b.cd_x1e3);
  CHECK(a.l1_x100 == b.l1_x100);
  double mean = 0.0;
  for (const auto& s : a.samples) mean += s.cd;
  CHECK(a.cd_x1e3 == doctest::Approx(1e3 * mean / 3).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate(model, {}), InvalidArgument);
}

TEST_CASE("dataset files round trip") {
  const auto data = make_dataset(2, SparseSource::GroundTruth, {}, 5);
  const auto dir = std::filesystem::temp_directory_path() / "gpr_dataset_rt";
  std::filesystem::remove_all(dir);
  save_dataset(data, dir);
  const auto back = load_dataset(dir);
  REQUIRE(back.size() == 2);
  CHECK(back[1].sparse.flatten() == data[1].sparse.flatten());
  CHECK(back[0].dense.flatten() == data[0].dense.flatten());
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_dataset(dir), DataError);
  std::filesystem::create_directories(dir);
  CHECK_THROWS_AS(load_dataset(dir), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("training is deterministic, logs epochs, and aborts on NaN") {
  const auto data = make_dataset(3, SparseSource::GroundTruth, {}, 31);
  const std::vector<Sample> train(data.begin(), data.begin() + 2), val(data.begin() + 2, data.end());
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 1;
  cfg.learning_rate = 1e-3;
  cfg.seed = 6;

  const auto dir = std::filesystem::temp_directory_path() / "gpr_train_unit";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const TrainOutputs outputs{dir / "metrics.csv", dir / "best.gprn"};

  GprNetModel a({4, 0.01, 1}), b({4, 0.01, 1});
  const auto ra = train_gprnet(a, train, val, cfg, outputs);
  const auto rb = train_gprnet(b, train, val, cfg);
  REQUIRE(ra.step_loss.size() == 4);
  CHECK(ra.step_loss == rb.step_loss);
  REQUIRE(ra.epochs.size() == 2);
  CHECK(ra.epochs[1].step == 4);
  CHECK(ra.epochs[0].lr == 1e-3);
  CHECK(std::isfinite(ra.epochs[0].val_cd));

  std::ifstream csv(*outputs.metrics_csv);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "step,train_cd,val_cd,lr");
  std::size_t rows = 0;
  while (std::getline(csv, line)) rows += !line.empty();
  CHECK(rows == 2);

  REQUIRE(std::filesystem::exists(*outputs.best_checkpoint));
  const auto kept = ad::load_checkpoint(*outputs.best_checkpoint);
  const auto before = std::filesystem::last_write_time(*outputs.best_checkpoint);

  param(a, "dec.fold.tail.1.bias").mutable_data()[0] = std::nan("");
  CHECK_THROWS_AS(train_gprnet(a, train, val, cfg, outputs), NumericalError);
  CHECK(std::filesystem::last_write_time(*outputs.best_checkpoint) == before);
  const auto after = ad::load_checkpoint(*outputs.best_checkpoint);
  CHECK(after.size() == kept.size());
  CHECK(std::equal(after[0].second.data().begin(), after[0].second.data().end(), kept[0].second.data().begin()));

  CHECK_THROWS_AS(train_gprnet(b, {}, val, cfg), InvalidArgument);
  auto short_pair = train;
  short_pair[0].sparse.points.pop_back();
  CHECK_THROWS_AS(train_gprnet(b, short_pair, val, cfg), InvalidArgument);
  std::filesystem::remove_all(dir);
}
