#include <benchmark/benchmark.h>

#include <random>

#include "gpr/autodiff/ops.hpp"
#include "gpr/cloud/metrics.hpp"
#include "gpr/common/random.hpp"
#include "gpr/gprnet/model.hpp"
#include "gpr/migration/backproject.hpp"
#include "gpr/scene/forward.hpp"

using namespace gpr;

namespace {

cloud::PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  cloud::PointCloud c;
  c.points.resize(n);
  for (auto& p : c.points) p = {u(rng), u(rng), u(rng)};
  return c;
}

ad::Tensor random_tensor(ad::Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<double> v(ad::element_count(shape));
  for (auto& x : v) x = n(rng);
  return ad::Tensor::from_data(std::move(shape), std::move(v));
}

void BM_ChamferIndexed(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_cloud(n, 1), b = random_cloud(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cloud::chamfer_distance(a, b).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChamferIndexed)->RangeMultiplier(4)->Range(256, 8192)->Complexity();

void BM_ChamferBrute(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_cloud(n, 1), b = random_cloud(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        cloud::chamfer_distance(a, b, cloud::ChamferVariant::Squared, cloud::Search::BruteForce).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChamferBrute)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

// Training-shaped pair: 8064 predicted points against 8064 ground truth.
void BM_ChamferLossBackward(benchmark::State& state) {
  const auto gt = random_cloud(8064, 3);
  auto pred = ad::Tensor::from_data({8064, 3}, random_cloud(8064, 4).flatten(), true);
  for (auto _ : state) {
    pred.zero_grad();
    cloud::chamfer_loss(pred, gt).backward();
  }
}
BENCHMARK(BM_ChamferLossBackward)->Unit(benchmark::kMillisecond);

void BM_Conv2d3x3(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0)), side = static_cast<std::size_t>(state.range(1));
  const auto x = random_tensor({c, side, side}, 5);
  const auto w = random_tensor({c, c, 3, 3}, 6);
  const auto b = random_tensor({c}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(ad::conv2d(x, w, b, 1, 1).data().data());
  state.counters["MAC/s"] =
      benchmark::Counter(static_cast<double>(c * c * 9 * side * side), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv2d3x3)->Args({8, 128})->Args({16, 64})->Args({32, 32})->Args({96, 16})->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto x = random_tensor({16, 64, 64}, 5);
  auto w = random_tensor({16, 16, 3, 3}, 6);
  w.set_requires_grad(true);
  for (auto _ : state) {
    w.zero_grad();
    ad::sum(ad::conv2d(x, w, {}, 1, 1)).backward();
  }
}
BENCHMARK(BM_Conv2dBackward)->Unit(benchmark::kMillisecond);

void BM_Backproject(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const survey::ScanLine line{{0, 1, 0}, {2, 1, 0}, 0.02};
  const auto bscan = scene::synthesize_bscan(scene::demo_scene(), line);
  const auto geom = scene::section_for_line(line, side, side);
  for (auto _ : state) benchmark::DoNotOptimize(migration::backproject(bscan, geom, 6.25).values.data());
}
BENCHMARK(BM_Backproject)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_GprNetForward(benchmark::State& state) {
  const gprnet::GprNetModel model({static_cast<std::size_t>(state.range(0)), 0.01, 1});
  const auto x = ad::Tensor::from_data({1500, 3}, random_cloud(1500, 8).flatten());
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x).data().data());
}
BENCHMARK(BM_GprNetForward)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
