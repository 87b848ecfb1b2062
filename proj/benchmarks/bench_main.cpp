#include <benchmark/benchmark.h>

#include "wcond/net/network.hpp"
#include "wcond/rng.hpp"
#include "wcond/svd.hpp"

namespace {

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wcond::Rng rng(1);
  const wcond::Matrix a = rng.normal_matrix(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(wcond::svd(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Svd)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNCubed);

void BM_SingularValues(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wcond::Rng rng(2);
  const wcond::Matrix a = rng.normal_matrix(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(wcond::singular_values(a));
}
BENCHMARK(BM_SingularValues)->RangeMultiplier(2)->Range(8, 128);

// Forward pass of a 32-64-64-1 tanh MLP on a 128-sample batch; arg 1 selects
// the reparameterized equilibrated weights.
void BM_Forward(benchmark::State& state) {
  using namespace wcond::net;
  const bool eq = state.range(0) != 0;
  std::vector<LayerSpec> arch = {dense(32, 64, Activation::tanh), dense(64, 64, Activation::tanh),
                                 dense(64, 1)};
  for (auto& s : arch) s.conditioning = eq ? Conditioning::equilibrate_reparam : Conditioning::none;
  const Network net(arch, 3);
  wcond::Rng rng(4);
  const wcond::Matrix x = rng.normal_matrix(128, 32);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x, Phase::eval));
  state.SetLabel(eq ? "e_reparam" : "plain");
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1);

}  // namespace
BENCHMARK_MAIN();
