// Serial reference vs OpenMP kernels. The first argument selects the policy
// (0 = Serial, 1 = Parallel), the second the truncation degree.
#include <benchmark/benchmark.h>

#include "multishift/equivalence.hpp"
#include "multishift/kernelgen.hpp"
#include "multishift/sampling.hpp"
#include "multishift/shiftcore.hpp"

namespace ms = multishift;

namespace {

ms::Exec policy(const benchmark::State& state) { return state.range(0) ? ms::Exec::Parallel : ms::Exec::Serial; }

void BM_SandwichEvaluate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(1));
  const auto m = ms::pochhammer_moments({1, 2}, 2, n);
  const auto mt = ms::pochhammer_moments({1, 3}, 2, n);
  const ms::SandwichEvaluator eval(m, mt, policy(state));
  ms::Rng rng(1);
  const ms::CMatrix c = ms::random_gaussian(2, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(eval.evaluate(c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.size()));
}

void BM_MomentsFromWeights(benchmark::State& state) {
  const int n = static_cast<int>(state.range(1));
  const auto w = ms::canonical_weights(ms::random_moment_system(3, n, 3, 2), ms::Exec::Serial);
  const auto g0 = ms::HermPD::identity(3);
  for (auto _ : state) benchmark::DoNotOptimize(ms::moments_from_weights(w, g0, policy(state)));
}

void BM_BuildMz(benchmark::State& state) {
  const int n = static_cast<int>(state.range(1));
  const auto m = ms::random_moment_system(2, n, 4, 3);
  for (auto _ : state) benchmark::DoNotOptimize(ms::build_mz(m, 0, policy(state)));
}

void BM_VerifyCertificate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(1));
  const auto m = ms::pochhammer_moments({1, 2}, 2, n);
  const auto mt = ms::pochhammer_moments({2, 1}, 2, n);
  const ms::SimilarityCertificate cert{ms::CMatrix(2, 2, {0.0, 1.0, 1.0, 0.0}), 0.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(ms::verify_certificate(m, mt, cert, 1e-10, policy(state)));
}

}  // namespace

BENCHMARK(BM_SandwichEvaluate)->ArgsProduct({{0, 1}, {32, 64, 128}});
BENCHMARK(BM_MomentsFromWeights)->ArgsProduct({{0, 1}, {6, 10}});
BENCHMARK(BM_BuildMz)->ArgsProduct({{0, 1}, {16, 32}});
BENCHMARK(BM_VerifyCertificate)->ArgsProduct({{0, 1}, {32, 64}});

BENCHMARK_MAIN();
