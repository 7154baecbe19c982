#include <benchmark/benchmark.h>

#include <random>

#include "sdyn/adjoint.hpp"
#include "sdyn/mlp.hpp"
#include "sdyn/mmd_loss.hpp"

using namespace sdyn;

namespace {

GenModelParams ou(std::size_t n_steps) {
  GenModelParams p;
  p.const_force.assign(3, 0.0);
  p.n_steps = n_steps;
  return p;
}

GenModelParams neural(std::size_t n_steps) {
  GenModelParams p = ou(n_steps);
  p.force_model = ForceModel::neural;
  p.mlp = MlpSpec::with_hidden({100, 100, 100});
  p.neural_weights = mlp_init(p.mlp, 1);
  return p;
}

FragmentBatch gaussian(Origin o, std::size_t n, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.01);
  FragmentBatch b;
  b.origin = o;
  b.dim = 3;
  b.fragments.assign(n, std::vector<double>(len));
  for (auto& f : b.fragments)
    for (auto& v : f) v = nd(rng);
  return b;
}

void run_adjoint(benchmark::State& state, const GenModelParams& p) {
  const std::vector<double> x0{0.2, 0.1, -0.3}, x1{0.21, 0.1, -0.3};
  const Trajectory t = simulate(p, x0, x1, 7);
  std::vector<double> g(t.values.size(), 1e-3);
  std::vector<double> grad(num_params(p));
  const FaragoScheme scheme(p);
  for (auto _ : state) {
    const AdjointState adj = solve_adjoint(t, scheme, g);
    accumulate_gradient(t, scheme, adj, grad);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(p.n_steps));
}

}  // namespace

static void BM_SimulateOu(benchmark::State& state) {
  const GenModelParams p = ou(static_cast<std::size_t>(state.range(0)));
  const std::vector<double> x0{0.2, 0.1, -0.3}, x1{0.21, 0.1, -0.3};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(p, x0, x1, ++seed));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SimulateOu)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oN);

static void BM_AdjointOu(benchmark::State& state) {
  run_adjoint(state, ou(static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_AdjointOu)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oN);

static void BM_AdjointNeural(benchmark::State& state) {
  run_adjoint(state, neural(static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_AdjointNeural)->RangeMultiplier(2)->Range(8, 64)->Complexity(benchmark::oN);

static void BM_Mmd2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = gaussian(Origin::generator, n, 57, 1);
  const auto y = gaussian(Origin::data, n, 57, 2);
  const KernelConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(mmd2_unbiased(x, y, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Mmd2)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNSquared);

static void BM_Mmd2Cotangents(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = gaussian(Origin::generator, n, 57, 3);
  const auto y = gaussian(Origin::data, n, 57, 4);
  const KernelConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(mmd2_cotangents(x, y, cfg));
}
BENCHMARK(BM_Mmd2Cotangents)->Arg(64)->Arg(256);

static void BM_MlpForward(benchmark::State& state) {
  const MlpSpec spec = MlpSpec::with_hidden({100, 100, 100});
  const auto theta = mlp_init(spec, 3);
  double r = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlp_forward(spec, theta, r));
    r += 1e-6;
  }
}
BENCHMARK(BM_MlpForward);

static void BM_MlpGrads(benchmark::State& state) {
  const MlpSpec spec = MlpSpec::with_hidden({100, 100, 100});
  const auto theta = mlp_init(spec, 3);
  std::vector<double> acc(theta.size());
  double r = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlp_accumulate_param_grad(spec, theta, r, 1.0, acc));
    r += 1e-6;
  }
}
BENCHMARK(BM_MlpGrads);

BENCHMARK_MAIN();
