#include <benchmark/benchmark.h>

#include "ustatlab/rng.hpp"
#include "ustatlab/wasserstein.hpp"

namespace {

using namespace ustatlab;

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  PhiloxStream stream(seed, 0, StreamRole::path);
  std::vector<double> out(n);
  for (auto& v : out) v = stream.next_normal();
  return out;
}

void BM_W2EmpiricalGaussian(benchmark::State& state) {
  const EmpiricalDistribution dist(normals(static_cast<std::size_t>(state.range(0)), 3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(w2_empirical_gaussian(dist, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_W2EmpiricalGaussian)->Arg(2000)->Arg(20000)->Arg(200000);

void BM_W2EmpiricalEmpirical(benchmark::State& state) {
  const EmpiricalDistribution a(normals(static_cast<std::size_t>(state.range(0)), 4));
  const EmpiricalDistribution b(normals(static_cast<std::size_t>(state.range(0)) + 7, 5));
  for (auto _ : state) {
    benchmark::DoNotOptimize(w2_empirical_empirical(a, b));
  }
}
BENCHMARK(BM_W2EmpiricalEmpirical)->Arg(2000)->Arg(20000);

void BM_InverseNormalCdf(benchmark::State& state) {
  double u = 1e-9;
  for (auto _ : state) {
    u = u < 0.999 ? u + 1e-4 : 1e-9;
    benchmark::DoNotOptimize(inverse_normal_cdf(u));
  }
}
BENCHMARK(BM_InverseNormalCdf);

}  // namespace
