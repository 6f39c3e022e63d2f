#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "gpr/autodiff/checkpoint.hpp"
#include "gpr/autodiff/layers.hpp"
#include "gpr/autodiff/ops.hpp"
#include "gpr/autodiff/optim.hpp"
#include "gpr/common/error.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace gpr;
using ad::Tensor;
using gpr::testing::check_gradient;

namespace {

Tensor param(ad::Shape shape, Rng& rng, bool kink_free = false) {
  const auto n = ad::element_count(shape);
  auto v = kink_free ? gpr::testing::kink_free_values(n, rng) : gpr::testing::random_values(n, rng);
  return Tensor::from_data(std::move(shape), std::move(v), true);
}

// Weighted sum so every output element gets a distinct upstream gradient.
Tensor probe(const Tensor& y, std::uint64_t seed = 99) {
  Rng rng(seed);
  return ad::sum(ad::mul(y, Tensor::from_data(y.shape(), gpr::testing::random_values(y.numel(), rng))));
}

void expect_gradients(const std::function<Tensor()>& f, std::initializer_list<Tensor> xs, double tol = 1e-6) {
  for (const auto& x : xs) {
    const auto r = check_gradient(f, x);
    INFO("worst index " << r.worst << " analytic " << r.analytic << " numeric " << r.numeric);
    CHECK(r.max_rel < tol);
  }
}

}  // namespace

TEST_CASE("tensor construction enforces shape/data agreement") {
  CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(Tensor::zeros({2, 0}), InvalidArgument);
  const Tensor t = Tensor::full({2, 3}, 1.5);
  CHECK(t.numel() == 6);
  CHECK(t.data()[5] == 1.5);
  CHECK_THROWS_AS(t.item(), InvalidArgument);
  CHECK_THROWS_AS(t.dim(2), InvalidArgument);
}

TEST_CASE("relu, max_reduce and their gradients on the documented cases") {
  const Tensor r = ad::relu(Tensor::from_data({3}, {-1, 0, 2}));
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) == std::vector<double>{0, 0, 2});

  const Tensor m = ad::max_reduce(Tensor::from_data({3, 2}, {1, 5, 2, 4, 3, 0}), 0);
  CHECK(m.shape() == ad::Shape{2});
  CHECK(m.data()[0] == 3);
  CHECK(m.data()[1] == 5);

  Tensor x = Tensor::from_data({2}, {-1, 2}, true);
  ad::sum(ad::relu(x)).backward();
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 1.0);
}

TEST_CASE("max_reduce routes tied gradients to the lowest index") {
  Tensor x = Tensor::from_data({3, 1}, {2, 2, 1}, true);
  ad::sum(ad::max_reduce(x, 0)).backward();
  CHECK(x.grad()[0] == 1.0);
  CHECK(x.grad()[1] == 0.0);
}

TEST_CASE("shape mismatches report both shapes") {
  const Tensor a = Tensor::zeros({2, 3}), b = Tensor::zeros({4, 5});
  try {
    (void)ad::matmul(a, b);
    FAIL("expected a shape error");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x5]") != std::string::npos);
  }
  CHECK_THROWS_AS(ad::add(a, Tensor::zeros({3, 2})), InvalidArgument);
  CHECK_THROWS_AS(ad::concat({a, b}, 0), InvalidArgument);
  CHECK_THROWS_AS(ad::reshape(a, {5}), InvalidArgument);
  CHECK_THROWS_AS(ad::slice(a, 1, 2, 4), InvalidArgument);
}

TEST_CASE("elementwise and dense primitives pass finite-difference checks") {
  Rng rng(1);
  Tensor a = param({4, 5}, rng), b = param({4, 5}, rng), w = param({5, 3}, rng), bias = param({3}, rng);
  expect_gradients([&] { return probe(ad::matmul(a, w)); }, {a, w});
  expect_gradients([&] { return probe(ad::add(a, b)); }, {a, b});
  expect_gradients([&] { return probe(ad::sub(a, b)); }, {a, b});
  expect_gradients([&] { return probe(ad::mul(a, b)); }, {a, b});
  expect_gradients([&] { return probe(ad::scale(a, -2.5)); }, {a});
  expect_gradients([&] { return probe(ad::add_bias(ad::matmul(a, w), bias)); }, {a, w, bias});
  expect_gradients([&] { return probe(ad::sigmoid(a)); }, {a});
  expect_gradients([&] { return ad::mean(ad::mul(a, a)); }, {a});

  Tensor k = param({4, 5}, rng, true);
  expect_gradients([&] { return probe(ad::relu(k)); }, {k});
}

TEST_CASE("structural primitives pass finite-difference checks") {
  Rng rng(2);
  Tensor a = param({3, 4}, rng), b = param({2, 4}, rng), c = param({3, 2}, rng);
  expect_gradients([&] { return probe(ad::concat({a, b}, 0)); }, {a, b});
  expect_gradients([&] { return probe(ad::concat({a, c}, 1)); }, {a, c});
  expect_gradients([&] { return probe(ad::reshape(a, {2, 6})); }, {a});
  expect_gradients([&] { return probe(ad::slice(a, 1, 1, 3)); }, {a});
  expect_gradients([&] { return probe(ad::slice(a, 0, 2, 3)); }, {a});
  expect_gradients([&] { return probe(ad::max_reduce(a, 0)); }, {a});
  expect_gradients([&] { return probe(ad::max_reduce(a, 1)); }, {a});
  Tensor row = param({1, 4}, rng);
  expect_gradients([&] { return probe(ad::broadcast_rows(row, 3)); }, {row});
  expect_gradients([&] { return probe(ad::repeat_rows(a, 3)); }, {a});
  expect_gradients([&] { return probe(ad::tile_rows(a, 2)); }, {a});
}

TEST_CASE("repeat_rows and tile_rows order rows as documented") {
  const Tensor a = Tensor::from_data({2, 1}, {1, 2});
  const Tensor r = ad::repeat_rows(a, 3), t = ad::tile_rows(a, 3);
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) == std::vector<double>{1, 1, 1, 2, 2, 2});
  CHECK(std::vector<double>(t.data().begin(), t.data().end()) == std::vector<double>{1, 2, 1, 2, 1, 2});
}

TEST_CASE("conv2d: identity kernel, output size, gradient check") {
  Rng rng(3);
  const Tensor x = Tensor::from_data({1, 5, 5}, gpr::testing::random_values(25, rng));
  const Tensor id = ad::conv2d(x, Tensor::full({1, 1, 1, 1}, 1.0), Tensor::zeros({1}));
  CHECK(std::equal(id.data().begin(), id.data().end(), x.data().begin()));

  CHECK(ad::conv2d(Tensor::zeros({2, 7, 6}), Tensor::zeros({3, 2, 3, 3}), Tensor(), 2, 1).shape() ==
        ad::Shape{3, 4, 3});
  CHECK_THROWS_AS(ad::conv2d(Tensor::zeros({1, 2, 2}), Tensor::zeros({1, 1, 3, 3}), Tensor()), InvalidArgument);

  Tensor in = param({1, 5, 5}, rng), w = param({2, 1, 3, 3}, rng), b = param({2}, rng);
  expect_gradients([&] { return probe(ad::conv2d(in, w, b, 1, 1)); }, {in, w, b});
  Tensor in2 = param({2, 6, 5}, rng), w2 = param({3, 2, 3, 3}, rng);
  expect_gradients([&] { return probe(ad::conv2d(in2, w2, Tensor(), 2, 1)); }, {in2, w2});
}

TEST_CASE("conv2d matches a direct nested-loop convolution") {
  Rng rng(4);
  const std::size_t ci = 2, co = 3, h = 6, w = 5, k = 3, pad = 1;
  const Tensor x = Tensor::from_data({ci, h, w}, gpr::testing::random_values(ci * h * w, rng));
  const Tensor wt = Tensor::from_data({co, ci, k, k}, gpr::testing::random_values(co * ci * k * k, rng));
  const Tensor b = Tensor::from_data({co}, gpr::testing::random_values(co, rng));
  const Tensor y = ad::conv2d(x, wt, b, 1, pad);
  for (std::size_t o = 0; o < co; ++o) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        double acc = b.data()[o];
        for (std::size_t i = 0; i < ci; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = 0; q < k; ++q) {
              const long rr = static_cast<long>(r + p) - static_cast<long>(pad);
              const long cc = static_cast<long>(c + q) - static_cast<long>(pad);
              if (rr < 0 || cc < 0 || rr >= static_cast<long>(h) || cc >= static_cast<long>(w)) continue;
              acc += x.data()[(i * h + rr) * w + cc] * wt.data()[((o * ci + i) * k + p) * k + q];
            }
          }
        }
        CHECK(y.data()[(o * h + r) * w + c] == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("maxpool2d and deconv2d") {
  const Tensor ones = Tensor::full({1, 8, 8}, 1.0);
  const Tensor p = ad::maxpool2d(ones, 8);
  CHECK(p.shape() == ad::Shape{1, 1, 1});
  CHECK(p.item() == 1.0);
  CHECK_THROWS_AS(ad::maxpool2d(Tensor::zeros({1, 4, 4}), 8), InvalidArgument);

  Rng rng(5);
  const Tensor up = ad::deconv2d(Tensor::zeros({3, 4, 5}), Tensor::zeros({3, 2, 2, 2}), Tensor(), 2);
  CHECK(up.shape() == ad::Shape{2, 8, 10});

  Tensor x = param({2, 4, 4}, rng, true);
  expect_gradients([&] { return probe(ad::maxpool2d(x, 2)); }, {x});
  Tensor d = param({2, 3, 3}, rng), w = param({2, 3, 2, 2}, rng), b = param({3}, rng);
  expect_gradients([&] { return probe(ad::deconv2d(d, w, b, 2)); }, {d, w, b});
  Tensor w3 = param({2, 1, 3, 3}, rng);
  expect_gradients([&] { return probe(ad::deconv2d(d, w3, Tensor(), 2)); }, {d, w3});
}

TEST_CASE("deconv2d is the adjoint of the strided convolution") {
  // <conv(x), y> == <x, deconv(y)> for matching kernels.
  Rng rng(6);
  const Tensor x = Tensor::from_data({2, 8, 8}, gpr::testing::random_values(128, rng));
  const Tensor w = Tensor::from_data({3, 2, 2, 2}, gpr::testing::random_values(24, rng));
  const Tensor y = Tensor::from_data({3, 4, 4}, gpr::testing::random_values(48, rng));
  const Tensor cx = ad::conv2d(x, w, Tensor(), 2, 0);
  const Tensor dy = ad::deconv2d(y, w, Tensor(), 2);
  const double lhs = std::inner_product(cx.data().begin(), cx.data().end(), y.data().begin(), 0.0);
  const double rhs = std::inner_product(x.data().begin(), x.data().end(), dy.data().begin(), 0.0);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("bce_with_logits value and gradient") {
  const Tensor logits = Tensor::from_data({2}, {0.0, 2.0});
  const Tensor targets = Tensor::from_data({2}, {1.0, 0.0});
  const double expected = (std::log(2.0) + std::log1p(std::exp(2.0))) / 2.0;
  CHECK(ad::bce_with_logits(logits, targets).item() == doctest::Approx(expected).epsilon(1e-14));
  // Large confident logits stay finite.
  CHECK(ad::bce_with_logits(Tensor::from_data({1}, {800.0}), Tensor::from_data({1}, {1.0})).item() < 1e-300);

  Rng rng(7);
  Tensor z = param({3, 4}, rng);
  const Tensor t = Tensor::from_data({3, 4}, gpr::testing::random_values(12, rng, 0.0, 1.0));
  expect_gradients([&] { return ad::bce_with_logits(ad::scale(z, 3.0), t); }, {z});
}

TEST_CASE("tape is topological and repeated backward accumulates only into leaves") {
  Tensor x = Tensor::from_data({2}, {1.0, -2.0}, true);
  const Tensor h = ad::mul(x, x);
  const Tensor loss = ad::sum(ad::add(h, h));
  const auto tape = ad::Tape::record(loss);
  CHECK(tape.is_topological());
  CHECK(tape.entry(tape.size() - 1).op == loss.op());
  loss.backward();
  loss.backward();
  CHECK(x.grad()[0] == doctest::Approx(8.0));
  CHECK(x.grad()[1] == doctest::Approx(-16.0));
}

TEST_CASE("replaying the same computation is bitwise deterministic") {
  auto run = [] {
    Rng rng(11);
    Tensor w = param({6, 4}, rng);
    Tensor x = param({5, 6}, rng);
    ad::sum(ad::sigmoid(ad::matmul(x, w))).backward();
    return std::vector<double>(w.grad().begin(), w.grad().end());
  };
  CHECK(run() == run());
}

TEST_CASE("shared mlp: identity, row permutation, row locality") {
  Rng rng(12);
  ad::SharedMlp id(3, {3}, rng, false);
  auto& l = id.layers()[0];
  std::fill(l.weight.mutable_data().begin(), l.weight.mutable_data().end(), 0.0);
  for (int i = 0; i < 3; ++i) l.weight.mutable_data()[i * 3 + i] = 1.0;
  const Tensor pts = Tensor::from_data({4, 3}, gpr::testing::random_values(12, rng));
  const Tensor same = id.forward(pts);
  CHECK(std::equal(same.data().begin(), same.data().end(), pts.data().begin()));

  ad::SharedMlp mlp(3, {64}, rng);
  const Tensor big = Tensor::from_data({1500, 3}, gpr::testing::random_values(4500, rng));
  CHECK(mlp.forward(big).shape() == ad::Shape{1500, 64});

  ad::SharedMlp deep(3, {8, 5}, rng);
  const auto v = gpr::testing::random_values(30, rng);
  std::vector<double> swapped = v;
  std::swap_ranges(swapped.begin(), swapped.begin() + 3, swapped.begin() + 27);  // rows 0 and 9
  const Tensor y0 = deep.forward(Tensor::from_data({10, 3}, v));
  const Tensor y1 = deep.forward(Tensor::from_data({10, 3}, swapped));
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(y0.data()[j] == y1.data()[45 + j]);
    CHECK(y0.data()[45 + j] == y1.data()[j]);
    CHECK(y0.data()[10 + j] == y1.data()[10 + j]);
  }

  std::vector<double> bumped = v;
  bumped[3 * 4] += 0.5;  // row 4 only
  const Tensor y2 = deep.forward(Tensor::from_data({10, 3}, bumped));
  for (std::size_t r = 0; r < 10; ++r) {
    if (r == 4) continue;
    for (std::size_t j = 0; j < 5; ++j) CHECK(y0.data()[r * 5 + j] == y2.data()[r * 5 + j]);
  }

  CHECK_THROWS_AS(deep.forward(Tensor::zeros({4, 2})), InvalidArgument);
}

TEST_CASE("adam: zero gradient, first step, quadratic bowl") {
  Tensor p = Tensor::from_data({2}, {0.3, -0.7}, true);
  ad::Adam still({p}, {0.1});
  for (int i = 0; i < 5; ++i) {
    still.zero_grad();
    ad::sum(ad::scale(p, 0.0)).backward();
    still.step();
  }
  CHECK(p.data()[0] == 0.3);
  CHECK(p.data()[1] == -0.7);
  CHECK(still.state().step == 5);

  // t = 1: m_hat = g, v_hat = g^2, update = lr * g / (|g| + eps).
  Tensor x = Tensor::from_data({1}, {2.0}, true);
  ad::Adam one({x}, {0.1});
  ad::sum(x).backward();
  one.step();
  CHECK(x.item() == doctest::Approx(2.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-15));

  Tensor y = Tensor::from_data({1}, {1.0}, true);
  ad::Adam bowl({y}, {0.05});
  for (int i = 0; i < 200; ++i) {
    bowl.zero_grad();
    ad::sum(ad::mul(y, y)).backward();
    bowl.step();
  }
  CHECK(std::abs(y.item()) < 0.05);
}

TEST_CASE("adam rejects non-finite gradients without touching parameters") {
  Tensor x = Tensor::from_data({2}, {1.0, 2.0}, true);
  ad::Adam opt({x}, {0.1});
  x.mutable_grad()[1] = std::nan("");
  CHECK_THROWS_AS(opt.step(), NumericalError);
  CHECK(x.data()[0] == 1.0);
  CHECK(x.data()[1] == 2.0);
  CHECK(opt.state().step == 0);
}

TEST_CASE("step decay multiplies by 0.7 every 50000 steps") {
  const ad::StepDecay d;
  CHECK(d.at(5e-5, 0) == 5e-5);
  CHECK(d.at(5e-5, 49999) == 5e-5);
  CHECK(d.at(5e-5, 50000) == doctest::Approx(0.7 * 5e-5).epsilon(1e-15));
  CHECK(d.at(5e-5, 100000) == doctest::Approx(0.49 * 5e-5).epsilon(1e-15));
}

TEST_CASE("checkpoint round trip, size census, and rejection paths") {
  Rng rng(13);
  ad::NamedTensors params{{"w", Tensor::from_data({2, 2}, gpr::testing::random_values(4, rng))},
                          {"layer.bias", Tensor::from_data({3}, gpr::testing::random_values(3, rng))}};
  std::stringstream buf;
  ad::write_checkpoint(buf, params);
  const std::string bytes = buf.str();
  // header 4+2+4; per tensor 2+len+1+1+4*rank+8*n
  CHECK(bytes.size() == 10 + (2 + 1 + 2 + 8 + 32) + (2 + 10 + 2 + 4 + 24));
  CHECK(bytes.size() == ad::checkpoint_size(params));

  std::stringstream in(bytes);
  const auto back = ad::read_checkpoint(in);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].first == params[i].first);
    CHECK(back[i].second.shape() == params[i].second.shape());
    CHECK(std::memcmp(back[i].second.data().data(), params[i].second.data().data(),
                      8 * params[i].second.numel()) == 0);
  }

  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream bad_in(bad);
  try {
    (void)ad::read_checkpoint(bad_in);
    FAIL("expected bad magic");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
  }

  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  std::stringstream wv(wrong_version);
  CHECK_THROWS_AS(ad::read_checkpoint(wv), FormatError);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(ad::read_checkpoint(truncated), FormatError);

  ad::NamedTensors dup{{"a", Tensor::zeros({1})}, {"a", Tensor::zeros({1})}};
  std::stringstream sink;
  CHECK_THROWS_AS(ad::write_checkpoint(sink, dup), InvalidArgument);
}

TEST_CASE("assign_parameters copies by name and rejects mismatches") {
  ad::NamedTensors target{{"a", Tensor::zeros({2})}};
  ad::assign_parameters(target, {{"a", Tensor::from_data({2}, {1, 2})}});
  CHECK(target[0].second.data()[1] == 2.0);
  CHECK_THROWS_AS(ad::assign_parameters(target, {{"b", Tensor::zeros({2})}}), DataError);
  CHECK_THROWS_AS(ad::assign_parameters(target, {{"a", Tensor::zeros({3})}}), DataError);
}
