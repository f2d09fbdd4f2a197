#include <benchmark/benchmark.h>

#include <map>

#include "jacobi/bench.hpp"
#include "jacobi/columnwise.hpp"
#include "jacobi/onesided.hpp"
#include "jacobi/rowwise.hpp"
#include "jacobi/serial.hpp"

namespace {

constexpr std::size_t kIters = 20;

jacobi::SolveOptions fixed() {
  jacobi::SolveOptions o;
  o.fixed_iterations = true;
  return o;
}

const jacobi::SystemInstance& instance(std::size_t n) {
  static std::map<std::size_t, jacobi::SystemInstance> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, jacobi::bench::generate_system(n, 42, true, 1e-8, kIters)).first;
  }
  return it->second;
}

void BM_JacobiStep(benchmark::State& state) {
  const auto& sys = instance(static_cast<std::size_t>(state.range(0)));
  const auto split = jacobi::split(sys.a());
  std::vector<double> out(sys.n());
  for (auto _ : state) {
    jacobi::jacobi_step_into(split, sys.b().span(), sys.x0().span(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sys.n() * sys.n()));
}
BENCHMARK(BM_JacobiStep)->RangeMultiplier(4)->Range(16, 1024);

void BM_Serial(benchmark::State& state) {
  const auto& sys = instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(jacobi::solve_serial(sys, fixed()));
}
BENCHMARK(BM_Serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Rowwise(benchmark::State& state) {
  const auto& sys = instance(static_cast<std::size_t>(state.range(0)));
  const auto p = static_cast<std::size_t>(state.range(1));
  const auto mode = state.range(2) ? jacobi::ShiftMode::nonblocking : jacobi::ShiftMode::blocking;
  for (auto _ : state) benchmark::DoNotOptimize(jacobi::solve_rowwise(sys, p, mode, fixed()));
}
BENCHMARK(BM_Rowwise)
    ->ArgsProduct({{64, 256}, {2, 4}, {0, 1}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_Columnwise(benchmark::State& state) {
  const auto& sys = instance(static_cast<std::size_t>(state.range(0)));
  const auto p = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(jacobi::solve_columnwise(sys, p, fixed()));
}
BENCHMARK(BM_Columnwise)->ArgsProduct({{64, 256}, {2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Onesided(benchmark::State& state) {
  const auto& sys = instance(static_cast<std::size_t>(state.range(0)));
  const auto p = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(jacobi::solve_onesided(sys, p, fixed()));
}
BENCHMARK(BM_Onesided)->ArgsProduct({{64, 256}, {2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
