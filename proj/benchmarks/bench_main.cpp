// Microbenchmarks for the hot paths: the constraint-propagation engine, the
// cache hierarchy, trace parsing, and a full sensitivity sweep.

#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "guslite/analysis.hpp"
#include "guslite/cache.hpp"
#include "guslite/engine.hpp"
#include "guslite/machine_model.hpp"
#include "guslite/trace.hpp"

namespace {

std::string fixture(const std::string& rel) {
  return std::string(GUSLITE_FIXTURES) + "/" + rel;
}

const guslite::MachineModel& toy_model() {
  static guslite::MachineModel m =
      guslite::load_model_file(fixture("models/toy_ooo.json"));
  return m;
}

std::vector<guslite::TraceEvent> fma_chain_events(std::uint64_t trips) {
  return guslite::expand_kernel(guslite::with_trip_counts(
      guslite::load_kernel_file(fixture("kernels/fma_chain.json")),
      {{"i", trips}}));
}

void BM_SimulateChainKernel(benchmark::State& state) {
  const guslite::MachineModel& m = toy_model();
  std::vector<guslite::TraceEvent> events =
      fma_chain_events(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) {
    guslite::SimulationResult r = guslite::simulate(m, events);
    benchmark::DoNotOptimize(r.predicted_cycles);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_SimulateChainKernel)->Arg(1000)->Arg(10000);

void BM_CacheAccess(benchmark::State& state) {
  const guslite::MachineModel& m = toy_model();
  std::mt19937 rng(12345);
  std::uniform_int_distribution<std::uint64_t> addr(0, (1u << 20) - 1);
  std::vector<std::uint64_t> addrs(4096);
  for (auto& a : addrs) a = addr(rng);
  guslite::CacheState cache(m);
  std::size_t i = 0;
  for (auto _ : state) {
    auto out = cache.access(addrs[i++ & 4095], 32, false);
    benchmark::DoNotOptimize(out.size());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CacheAccess);

void BM_ParseTraceLine(benchmark::State& state) {
  const std::string line =
      R"({"pc":42,"class":"load","rr":[5],"rw":[6,7],)"
      R"("mem":[{"a":4096,"s":32,"st":false}]})";
  for (auto _ : state) {
    guslite::TraceEvent ev = guslite::parse_trace_line(line, 1);
    benchmark::DoNotOptimize(ev.pc);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ParseTraceLine);

void BM_SensitivitySweep(benchmark::State& state) {
  const guslite::MachineModel& m = toy_model();
  guslite::KernelSpec k = guslite::with_trip_counts(
      guslite::load_kernel_file(fixture("kernels/fma_chain.json")), {{"i", 500}});
  guslite::SensitivityPlan plan = guslite::SensitivityPlan::defaults(m);
  for (auto _ : state) {
    guslite::SensitivityResult r = guslite::run_sensitivity(
        m, guslite::source_from_kernel(k), plan,
        static_cast<unsigned>(state.range(0)));
    benchmark::DoNotOptimize(r.baseline_cycles);
  }
}
BENCHMARK(BM_SensitivitySweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
