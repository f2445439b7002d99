// Throughput benchmarks for the hot paths: simulation stepping, window
// fitting, and network forward/backward. Run manually, not part of ctest.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <span>
#include <vector>

#include "bubblelab/estimator.hpp"
#include "bubblelab/nnet.hpp"
#include "bubblelab/rng.hpp"
#include "bubblelab/sim.hpp"

namespace {

using namespace bubblelab;

sim::RegimeChainSpec bench_chain() {
  return sim::RegimeChainSpec::two_state({0.15, 0.9}, {0.15, 1.3}, 0.995, 0.995);
}

void bm_simulate_path(benchmark::State& state) {
  const auto n_steps = static_cast<std::size_t>(state.range(0));
  const auto chain = bench_chain();
  const double dt = sim::years_from_seconds(120.0);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    auto path = sim::simulate_path(chain, 100.0, n_steps, dt, RngSpec{7, stream++});
    benchmark::DoNotOptimize(path.prices.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n_steps));
}

void bm_fit_power_window(benchmark::State& state) {
  const auto window = static_cast<std::size_t>(state.range(0));
  const auto path =
      sim::simulate_path(bench_chain(), 100.0, window - 1, sim::years_from_seconds(120.0),
                         RngSpec{11, 0});
  const std::span<const double> prices(path.prices);
  for (auto _ : state) {
    auto fit = estimator::fit_power_window(prices, path.dt_years());
    benchmark::DoNotOptimize(fit.exponent);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(window));
}

void bm_rolling_classify(benchmark::State& state) {
  const auto n_steps = static_cast<std::size_t>(state.range(0));
  const auto path = sim::simulate_path(bench_chain(), 100.0, n_steps,
                                       sim::years_from_seconds(120.0), RngSpec{13, 0});
  estimator::RollingConfig cfg;
  cfg.window_len = 256;
  cfg.stride = 64;
  for (auto _ : state) {
    auto labels = estimator::rolling_classify(path, cfg);
    benchmark::DoNotOptimize(labels.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n_steps));
}

nnet::Sequence bench_sequence(std::size_t len) {
  const auto path = sim::simulate_path(bench_chain(), 100.0, len, sim::years_from_seconds(120.0),
                                       RngSpec{17, 0});
  nnet::Sequence seq;
  seq.features = nnet::featurize(path, nnet::compute_feature_stats({path}));
  seq.labels.assign(len, 1);
  return seq;
}

void bm_network_forward(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  Pcg64 gen(23, 0);
  const auto model = nnet::init_model(2, 16, gen);
  const auto seq = bench_sequence(len);
  for (auto _ : state) {
    auto probs = nnet::network_forward(model, seq.features);
    benchmark::DoNotOptimize(probs.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(len));
}

void bm_network_backward(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  Pcg64 gen(23, 0);
  const auto model = nnet::init_model(2, 16, gen);
  const auto seq = bench_sequence(len);
  for (auto _ : state) {
    auto grads = nnet::network_backward(model, seq.features, seq.labels);
    benchmark::DoNotOptimize(grads.loss);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(len));
}

BENCHMARK(bm_simulate_path)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(bm_fit_power_window)->Arg(256)->Arg(1024);
BENCHMARK(bm_rolling_classify)->Arg(1 << 14);
BENCHMARK(bm_network_forward)->Arg(256)->Arg(1024);
BENCHMARK(bm_network_backward)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
