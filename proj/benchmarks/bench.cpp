#include <benchmark/benchmark.h>

#include "rsc/angular_momentum.hpp"
#include "rsc/config.hpp"
#include "rsc/dynamics.hpp"
#include "rsc/protocol.hpp"

using namespace rsc;

static void BM_ClebschGordanCached(benchmark::State& state) {
  for (auto _ : state) {
    double s = 0;
    for (int m = -3; m <= 3; m += 2) s += clebsch_gordan(half(5), half(m), HalfInt(1), HalfInt(0), half(5), half(m));
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_ClebschGordanCached);

static void BM_PrepareScheme(benchmark::State& state) {
  const RunConfig c = preset("fig5");
  for (auto _ : state) benchmark::DoNotOptimize(c.scheme());
}
BENCHMARK(BM_PrepareScheme)->Unit(benchmark::kMicrosecond);

static void BM_BuildGenerator(benchmark::State& state) {
  const RunConfig c = preset("fig5");
  const RamanScheme s = c.scheme();
  const Basis basis = make_box_basis(s.levels, c.resolved_mean_quanta(), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_generator(basis, s, GeneratorOptions{}));
  state.counters["dimension"] = static_cast<double>(basis.size());
}
BENCHMARK(BM_BuildGenerator)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_SchemePulse(benchmark::State& state) {
  RunConfig c = preset(state.range(0) == 0 ? "fig5" : "fig6");
  for (auto _ : state) benchmark::DoNotOptimize(simulate_pulse(c.scheme(), c.resolved_mean_quanta(), c.scenario(), c.integrator()));
}
BENCHMARK(BM_SchemePulse)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_IdealProtocol(benchmark::State& state) {
  const RunConfig c = preset("appendixA");
  for (auto _ : state) benchmark::DoNotOptimize(run_protocol(c.protocol(), c.protocol_inputs()));
}
BENCHMARK(BM_IdealProtocol)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
