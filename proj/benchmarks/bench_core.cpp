#include <benchmark/benchmark.h>

#include <cmath>

#include "srl/distributions.hpp"
#include "srl/network.hpp"
#include "srl/reference.hpp"
#include "srl/trainer.hpp"

using namespace srl;

namespace {

LabeledSample logistic_sample(std::size_t n) {
  const auto dist = make_distribution("logistic_1d", {{"c", 2.0}});
  LabeledSample raw = sample(*dist, n, 11);
  return {augment_rows(raw.points), raw.labels, raw.seed};
}

}  // namespace

static void BM_ForwardBatch(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const Network net = Network::init(m, 2, std::pow(static_cast<double>(m), -0.125), 1);
  const LabeledSample data = logistic_sample(1024);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(data.points));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_ForwardBatch)->Arg(256)->Arg(4096)->Arg(65536);

static void BM_GdStep(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const double rho = std::pow(static_cast<double>(m), -0.125);
  Network net = Network::init(m, 2, rho, 2);
  const LabeledSample data = logistic_sample(n);
  for (auto _ : state) benchmark::DoNotOptimize(gd_step(net, data, 4.0 / (rho * rho)));
}
BENCHMARK(BM_GdStep)->Args({256, 512})->Args({4096, 4096})->Args({65536, 4096})->Unit(benchmark::kMillisecond);

static void BM_InfiniteForward(benchmark::State& state) {
  const auto features = static_cast<std::size_t>(state.range(0));
  Vector slope(1);
  slope << 2.0;
  const auto model = affine_teacher_reference(slope, 0.0, features, 3);
  const LabeledSample data = logistic_sample(1024);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward_batch(data.points));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_InfiniteForward)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
