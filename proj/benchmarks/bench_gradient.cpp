#include <benchmark/benchmark.h>

#include <random>

#include "arnn/inference.hpp"
#include "arnn/learning.hpp"

namespace {

struct Instance {
  arnn::ArnnModel model;
  arnn::TrainingSample sample;
};

Instance random_instance(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto sn = static_cast<Eigen::Index>(n);
  arnn::Matrix wx = arnn::Matrix::Zero(sn, sn), wy = arnn::Matrix::Zero(sn, sn);
  for (Eigen::Index i = 0; i < sn; ++i) {
    for (Eigen::Index j = 0; j < sn; ++j) {
      if (i != j) {
        wx(i, j) = u(rng);
        wy(i, j) = u(rng);
      }
    }
  }
  arnn::Vector a(sn), k(sn);
  for (Eigen::Index i = 0; i < sn; ++i) {
    a(i) = u(rng);
    k(i) = u(rng);
  }
  return {arnn::ArnnModel(1.0, wx, wy), {a, k, 1}};
}

void BM_CostGradient(benchmark::State& state) {
  const auto inst = random_instance(static_cast<std::size_t>(state.range(0)), 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(arnn::cost_gradient(inst.model, inst.sample));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CostGradient)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNCubed);

void BM_SolveFixedPoint(benchmark::State& state) {
  const auto inst = random_instance(static_cast<std::size_t>(state.range(0)), 42);
  const auto inputs = arnn::ExternalInputs::from_attack_ratio(inst.sample.attack_ratio);
  for (auto _ : state) {
    benchmark::DoNotOptimize(arnn::solve_fixed_point(inst.model, inputs));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveFixedPoint)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNSquared);

void BM_GradientAtFixedPoint(benchmark::State& state) {
  const auto inst = random_instance(static_cast<std::size_t>(state.range(0)), 42);
  const auto inputs = arnn::ExternalInputs::from_attack_ratio(inst.sample.attack_ratio);
  const auto states = arnn::solve_fixed_point(inst.model, inputs);
  for (auto _ : state) {
    const auto ws = arnn::build_workspace(inst.model, inputs, states);
    benchmark::DoNotOptimize(arnn::cost_gradient_at(states, ws, inst.sample.compromised_ratio));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GradientAtFixedPoint)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNCubed);

}  // namespace

BENCHMARK_MAIN();
