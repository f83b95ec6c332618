#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ustatlab/accum.hpp"
#include "ustatlab/processes.hpp"
#include "ustatlab/projections.hpp"
#include "ustatlab/ustat.hpp"

using namespace ustatlab;

namespace {

// Test-only oracle: plain recursive enumeration over increasing tuples,
// independent of the combinadic iteration in the engine.
double brute_force_ustat(const Kernel& kernel, std::span<const double> sample) {
  const int m = kernel.degree();
  const int n = static_cast<int>(sample.size());
  std::vector<double> buf(m);
  double sum = 0.0;
  long count = 0;
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == m) {
      sum += kernel(buf);
      ++count;
      return;
    }
    for (int i = start; i < n; ++i) {
      buf[pos] = sample[i];
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  return sum / static_cast<double>(count);
}

Kernel product_kernel() { return catalog_kernel("product"); }

Kernel zero_kernel(int m) {
  return Kernel("zero", m, [](std::span<const double>) { return 0.0; }, true);
}

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
  const ProcessSpec spec = parse_process_spec("iid_normal(0,1)");
  PhiloxStream stream(seed, 0, StreamRole::path);
  return sample_path(spec, n, stream);
}

}  // namespace

TEST_CASE("exact U-statistic on closed-form cases") {
  const std::vector<double> sample = {1.0, 2.0, 3.0};
  CHECK(u_statistic_exact(product_kernel(), sample) ==
        doctest::Approx(11.0 / 3.0).epsilon(1e-15));

  const Kernel mean = catalog_kernel("mean");
  const auto xs = normal_sample(137, 5);
  CHECK(u_statistic_exact(mean, xs) ==
        doctest::Approx(compensated_mean(xs)).epsilon(1e-14));

  CHECK(u_statistic_exact(zero_kernel(2), sample) == 0.0);
}

TEST_CASE("exact U-statistic agrees with brute force for m = 1..3") {
  const auto sample = normal_sample(12, 77);
  for (const char* name : {"mean", "variance", "gini", "product",
                           "triple_product"}) {
    const Kernel kernel = catalog_kernel(name);
    CHECK(u_statistic_exact(kernel, sample) ==
          doctest::Approx(brute_force_ustat(kernel, sample)).epsilon(1e-13));
  }
}

TEST_CASE("exact U-statistic is permutation invariant in the sample") {
  const Kernel kernel = catalog_kernel("variance");
  auto sample = normal_sample(30, 12);
  const double base = u_statistic_exact(kernel, sample);
  const double scale = std::max(1.0, std::abs(base));
  PhiloxStream stream(3, 0, StreamRole::subsets);
  for (int trial = 0; trial < 50; ++trial) {
    for (std::size_t i = sample.size(); i > 1; --i) {
      std::swap(sample[i - 1], sample[stream.next_below(i)]);
    }
    CHECK(std::abs(u_statistic_exact(kernel, sample) - base) <= 1e-12 * scale);
  }
}

TEST_CASE("U-statistic is linear in the kernel") {
  const auto sample = normal_sample(25, 13);
  const Kernel h = catalog_kernel("product");
  const Kernel g = catalog_kernel("gini");
  const double a = 2.5, b = -1.25;
  const Kernel combo("combo", 2,
                     [&, a, b](std::span<const double> x) {
                       return a * h(x) + b * g(x);
                     },
                     true);
  const double lhs = u_statistic_exact(combo, sample);
  const double rhs =
      a * u_statistic_exact(h, sample) + b * u_statistic_exact(g, sample);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("chunked enumeration is stable and near-exact") {
  const Kernel kernel = catalog_kernel("gini");
  const auto sample = normal_sample(60, 21);
  UStatOptions serial;
  const double base = u_statistic_exact(kernel, sample, serial);
  for (unsigned chunks : {2u, 3u, 7u, 16u}) {
    UStatOptions opts;
    opts.num_chunks = chunks;
    const double v1 = u_statistic_exact(kernel, sample, opts);
    const double v2 = u_statistic_exact(kernel, sample, opts);
    CHECK(v1 == v2);  // bitwise for a fixed chunk count
    CHECK(std::abs(v1 - base) <= 1e-12 * std::max(1.0, std::abs(base)));
  }
}

TEST_CASE("engine errors") {
  const Kernel kernel = catalog_kernel("variance");
  const std::vector<double> tiny = {1.0};
  CHECK_THROWS_WITH_AS(u_statistic_exact(kernel, tiny),
                       doctest::Contains("sample smaller than degree"),
                       std::invalid_argument);

  UStatOptions opts;
  opts.enumeration_cap = 10;
  const auto sample = normal_sample(40, 2);
  CHECK_THROWS_WITH_AS(u_statistic_exact(kernel, sample, opts),
                       doctest::Contains("u_statistic_incomplete"),
                       EnumerationCapExceeded);

  PhiloxStream stream(1, 0, StreamRole::subsets);
  CHECK_THROWS_AS(u_statistic_incomplete(kernel, tiny, 500, stream),
                  std::invalid_argument);
  CHECK_THROWS_AS(u_statistic_incomplete(kernel, sample, 50, stream),
                  std::invalid_argument);
}

TEST_CASE("incomplete estimator: constant kernel and seeded accuracy") {
  const Kernel constant("constant", 2,
                        [](std::span<const double>) { return 3.25; }, true);
  const auto sample = normal_sample(50, 31);
  PhiloxStream stream(4, 0, StreamRole::subsets);
  const auto c = u_statistic_incomplete(constant, sample, 500, stream);
  CHECK(c.estimate == 3.25);
  CHECK(c.mc_se == 0.0);

  const Kernel kernel = catalog_kernel("product");
  const auto big = normal_sample(1000, 32);
  const double exact = u_statistic_exact(kernel, big);
  PhiloxStream stream2(5, 0, StreamRole::subsets);
  const auto inc = u_statistic_incomplete(kernel, big, 100000, stream2);
  CHECK(std::abs(inc.estimate - exact) < 3.0 * inc.mc_se);
}

TEST_CASE("incomplete estimator is unbiased across seeded runs") {
  const Kernel kernel = catalog_kernel("gini");
  const auto sample = normal_sample(80, 41);
  const double exact = u_statistic_exact(kernel, sample);
  const int runs = 500;
  std::vector<double> estimates(runs);
  for (int r = 0; r < runs; ++r) {
    PhiloxStream stream(99, static_cast<std::uint32_t>(r), StreamRole::subsets);
    estimates[r] = u_statistic_incomplete(kernel, sample, 150, stream).estimate;
  }
  const MeanVar mv = mean_and_variance(estimates);
  CHECK(std::abs(mv.mean - exact) < 4.0 * mv.se_of_mean());
}

TEST_CASE("incomplete estimator draws valid index tuples") {
  // indices distinct within each tuple: a kernel that traps coincident
  // arguments on a sample of distinct values
  const Kernel trap("trap", 3,
                    [](std::span<const double> x) {
                      REQUIRE(x[0] != x[1]);
                      REQUIRE(x[0] != x[2]);
                      REQUIRE(x[1] != x[2]);
                      return 0.0;
                    },
                    true);
  std::vector<double> sample(10);
  for (int i = 0; i < 10; ++i) sample[i] = i;
  PhiloxStream stream(6, 0, StreamRole::subsets);
  const auto r = u_statistic_incomplete(trap, sample, 5000, stream);
  CHECK(r.estimate == 0.0);
}

TEST_CASE("component U-statistics") {
  // spec example: variance kernel under N(0,1), h1 = (x^2-1)/2 on {0,1}
  const ProcessSpec normal01 = parse_process_spec("iid_normal(0,1)");
  const Kernel variance =
      center(catalog_kernel("variance"), normal01, 10000);
  const auto ref = ReferenceMeasure::true_xi(normal01, 10000, 511);
  const Kernel h1 = canonical_kernel(variance, 1, ref);
  const std::vector<double> sample = {0.0, 1.0};
  CHECK(component_ustat(1, h1, sample) ==
        doctest::Approx(-0.25).epsilon(1e-14));

  CHECK_THROWS_WITH_AS(component_ustat(2, h1, sample),
                       doctest::Contains("does not match"),
                       std::invalid_argument);

  CHECK(component_ustat(2, zero_kernel(2), sample) == 0.0);
}

TEST_CASE("hoeffding reconstruction: m = 1 is the sample mean") {
  const Kernel mean = catalog_kernel("mean");
  const auto sample = normal_sample(40, 51);
  const auto ref = ReferenceMeasure::plug_in_of(sample);
  const auto hc = hoeffding_reconstruct(mean, sample, ref);
  REQUIRE(hc.components.size() == 1);
  CHECK(hc.binomial_weights == std::vector<std::uint64_t>{1});
  CHECK(hc.components[0] ==
        doctest::Approx(compensated_mean(sample)).epsilon(1e-14));
  CHECK(std::abs(hc.reconstruct() - hc.u_exact) <= 1e-12 * hc.scale);
}

TEST_CASE("hoeffding reconstruction identity in plug-in mode") {
  const ProcessSpec normal01 = parse_process_spec("iid_normal(0,1)");
  SUBCASE("variance kernel, m = 2") {
    const Kernel kernel = center(catalog_kernel("variance"), normal01, 10000);
    const auto sample = normal_sample(20, 61);
    const auto ref = ReferenceMeasure::plug_in_of(sample);
    const auto hc = hoeffding_reconstruct(kernel, sample, ref);
    CHECK(hc.binomial_weights == std::vector<std::uint64_t>{2, 1});
    CHECK(std::abs(hc.reconstruct() - hc.u_exact) <= 1e-10 * hc.scale);
  }
  SUBCASE("triple product, m = 3") {
    const Kernel kernel = catalog_kernel("triple_product");
    const auto sample = normal_sample(25, 62);
    const auto ref = ReferenceMeasure::plug_in_of(sample);
    const auto hc = hoeffding_reconstruct(kernel, sample, ref);
    CHECK(hc.binomial_weights == std::vector<std::uint64_t>{3, 3, 1});
    CHECK(std::abs(hc.reconstruct() - hc.u_exact) <= 1e-10 * hc.scale);
  }
}

TEST_CASE("reconstruction identity also holds against an oracle reference") {
  const ProcessSpec normal01 = parse_process_spec("iid_normal(0,1)");
  const Kernel kernel = center(catalog_kernel("gini"), normal01, 10000);
  const auto sample = normal_sample(24, 63);
  auto ref = ReferenceMeasure::true_xi(normal01, 10000, 64);
  ref.use_closed_forms = false;
  const auto hc = hoeffding_reconstruct(kernel, sample, ref);
  CHECK(std::abs(hc.reconstruct() - hc.u_exact) <= 1e-10 * hc.scale);
}

TEST_CASE("degenerate kernel has vanishing first component") {
  const ProcessSpec normal01 = parse_process_spec("iid_normal(0,1)");
  const auto sample = normal_sample(100, 71);

  SUBCASE("closed-form projections: exactly zero") {
    const auto ref = ReferenceMeasure::true_xi(normal01, 10000, 72);
    const auto hc = hoeffding_reconstruct(product_kernel(), sample, ref);
    CHECK(hc.components[0] == 0.0);
  }
  SUBCASE("oracle projections: zero within Monte Carlo error") {
    auto ref = ReferenceMeasure::true_xi(normal01, 10000, 73);
    ref.use_closed_forms = false;
    const auto hc = hoeffding_reconstruct(product_kernel(), sample, ref);
    // U^(1) = mean(path) * mean(oracle) here; both factors are O(1/sqrt).
    CHECK(std::abs(hc.components[0]) < 5e-3);
  }
}
