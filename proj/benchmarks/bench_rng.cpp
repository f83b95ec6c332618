#include <benchmark/benchmark.h>

#include "ustatlab/processes.hpp"
#include "ustatlab/rng.hpp"

namespace {

using namespace ustatlab;

void BM_PhiloxU64(benchmark::State& state) {
  PhiloxStream stream(1, 0, StreamRole::path);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream.next_u64());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxU64);

void BM_PhiloxNormal(benchmark::State& state) {
  PhiloxStream stream(2, 0, StreamRole::path);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream.next_normal());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxNormal);

void BM_SamplePathAR1(benchmark::State& state) {
  const ProcessSpec spec = parse_process_spec("ar1_gaussian(0.5,1)");
  std::uint32_t rep = 0;
  for (auto _ : state) {
    PhiloxStream stream(3, rep++, StreamRole::path);
    benchmark::DoNotOptimize(
        sample_path(spec, static_cast<std::size_t>(state.range(0)), stream));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePathAR1)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
