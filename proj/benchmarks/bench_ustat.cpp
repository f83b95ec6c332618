#include <benchmark/benchmark.h>

#include "ustatlab/combinatorics.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/processes.hpp"
#include "ustatlab/rng.hpp"
#include "ustatlab/ustat.hpp"

namespace {

using namespace ustatlab;

std::vector<double> make_sample(std::size_t n) {
  PhiloxStream stream(1, 0, StreamRole::path);
  return sample_path(parse_process_spec("iid_normal(0,1)"), n, stream);
}

void BM_UStatExact(benchmark::State& state) {
  const Kernel kernel = catalog_kernel("variance");
  const auto sample = make_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(u_statistic_exact(kernel, sample));
  }
  const double tuples = static_cast<double>(
      binomial_or_max(sample.size(), kernel.degree()));
  state.SetItemsProcessed(static_cast<int64_t>(tuples * state.iterations()));
}
BENCHMARK(BM_UStatExact)->Arg(100)->Arg(400)->Arg(1600);

void BM_UStatExactChunked(benchmark::State& state) {
  const Kernel kernel = catalog_kernel("variance");
  const auto sample = make_sample(2000);
  UStatOptions opts;
  opts.num_chunks = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(u_statistic_exact(kernel, sample, opts));
  }
}
BENCHMARK(BM_UStatExactChunked)->Arg(1)->Arg(4)->Arg(16);

void BM_UStatIncomplete(benchmark::State& state) {
  const Kernel kernel = catalog_kernel("variance");
  const auto sample = make_sample(10000);
  std::uint32_t run = 0;
  for (auto _ : state) {
    PhiloxStream stream(2, run++, StreamRole::subsets);
    benchmark::DoNotOptimize(
        u_statistic_incomplete(kernel, sample,
                               static_cast<std::uint64_t>(state.range(0)),
                               stream));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UStatIncomplete)->Arg(10000)->Arg(100000);

}  // namespace
