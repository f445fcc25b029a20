// Serial vs OpenMP dense kernels at the network's layer shapes, plus one full
// training step and one environment step.

#include <benchmark/benchmark.h>

#include <vector>

#include "uavnoma/agent.hpp"
#include "uavnoma/environment.hpp"
#include "uavnoma/kernels.hpp"
#include "uavnoma/network.hpp"
#include "uavnoma/rng.hpp"

using namespace uavnoma;

namespace {

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

kernels::Shape shape_of(const benchmark::State& state) {
  return {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)),
          static_cast<std::size_t>(state.range(2))};
}

template <auto Kernel>
void BM_forward(benchmark::State& state) {
  const auto s = shape_of(state);
  Rng rng(1);
  const auto x = random_vector(s.batch * s.in, rng), w = random_vector(s.in * s.out, rng),
             b = random_vector(s.out, rng);
  std::vector<double> y(s.batch * s.out);
  for (auto _ : state) {
    Kernel(x, w, b, y, s, true);
    benchmark::DoNotOptimize(y.data());
  }
  state.counters["FLOPs"] =
      benchmark::Counter(2.0 * s.batch * s.in * s.out, benchmark::Counter::kIsIterationInvariantRate);
}

template <auto Kernel>
void BM_grad_params(benchmark::State& state) {
  const auto s = shape_of(state);
  Rng rng(2);
  const auto x = random_vector(s.batch * s.in, rng), dy = random_vector(s.batch * s.out, rng);
  std::vector<double> dw(s.in * s.out), db(s.out);
  for (auto _ : state) {
    Kernel(x, dy, dw, db, s);
    benchmark::DoNotOptimize(dw.data());
  }
}

template <auto Kernel>
void BM_grad_input(benchmark::State& state) {
  const auto s = shape_of(state);
  Rng rng(3);
  const auto dy = random_vector(s.batch * s.out, rng), w = random_vector(s.in * s.out, rng);
  std::vector<double> dx(s.batch * s.in);
  for (auto _ : state) {
    Kernel(dy, w, dx, s);
    benchmark::DoNotOptimize(dx.data());
  }
}

void layer_shapes(benchmark::internal::Benchmark* b) {
  b->Args({128, 17, 128})->Args({128, 128, 128})->Args({128, 128, 33})->Args({128, 128, 1})->Args({1, 128, 128});
}

void BM_train_step(benchmark::State& state) {
  const env::Environment environment(env::Scenario::reference(channel::ChannelParams::sub6(), env::LinkMode::Expected),
                                     env::RewardWeights{1.0, 0.0, 1e7, 0.0, 0.0});
  Rng rng(4);
  rl::ReplayBuffer buffer(15000);
  auto obs = environment.reset(rng);
  env::Snapshot snap = obs.snapshot;
  env::StateVector st = obs.state;
  for (int i = 0; i < 2000; ++i) {
    const std::size_t a = rng.below(environment.action_spec().count);
    auto r = environment.step(snap, a, rng);
    buffer.push({st, a, r.reward, r.state});
    snap = r.snapshot;
    st = r.state;
  }
  auto policy = nn::init_network(environment.state_dim(), environment.action_spec().count, nn::Head::Dueling, 5);
  const auto target = policy;
  auto adam = nn::AdamState::for_params(policy);
  Rng sampling(6);
  for (auto _ : state) {
    auto r = rl::train_step(policy, target, adam, buffer, 128, 0.999, 1e-3, sampling);
    benchmark::DoNotOptimize(r.loss);
  }
}

void BM_env_step(benchmark::State& state) {
  const env::Environment environment(env::Scenario::reference(channel::ChannelParams::sub6(), env::LinkMode::Expected),
                                     env::RewardWeights{1.0, 0.0, 1e7, 0.0, 0.0});
  Rng rng(7);
  auto snap = environment.reset(rng).snapshot;
  for (auto _ : state) {
    auto r = environment.step(snap, rng.below(32), rng);
    snap = r.snapshot;
    benchmark::DoNotOptimize(r.reward);
  }
}

}  // namespace

BENCHMARK(BM_forward<kernels::serial::dense_forward>)->Name("forward/serial")->Apply(layer_shapes);
BENCHMARK(BM_forward<kernels::omp::dense_forward>)->Name("forward/omp")->Apply(layer_shapes);
BENCHMARK(BM_grad_params<kernels::serial::dense_grad_params>)->Name("grad_params/serial")->Apply(layer_shapes);
BENCHMARK(BM_grad_params<kernels::omp::dense_grad_params>)->Name("grad_params/omp")->Apply(layer_shapes);
BENCHMARK(BM_grad_input<kernels::serial::dense_grad_input>)->Name("grad_input/serial")->Apply(layer_shapes);
BENCHMARK(BM_grad_input<kernels::omp::dense_grad_input>)->Name("grad_input/omp")->Apply(layer_shapes);
BENCHMARK(BM_train_step);
BENCHMARK(BM_env_step);

BENCHMARK_MAIN();
