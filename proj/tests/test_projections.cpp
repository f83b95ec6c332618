#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "ustatlab/accum.hpp"
#include "ustatlab/processes.hpp"
#include "ustatlab/projections.hpp"

using namespace ustatlab;

namespace {

const ProcessSpec kNormal01 = parse_process_spec("iid_normal(0,1)");
const ProcessSpec kUniform01 = parse_process_spec("iid_uniform(0,1)");

double eval1(const Kernel& k, double x) {
  const double args[1] = {x};
  return k(std::span<const double>(args, 1));
}

double eval2(const Kernel& k, double x, double y) {
  const double args[2] = {x, y};
  return k(std::span<const double>(args, 2));
}

// L_q norm of a value sample.
double lq_norm(std::span<const double> values, double q) {
  CompensatedSum s;
  for (double v : values) s.add(std::pow(std::abs(v), q));
  return std::pow(s.value() / static_cast<double>(values.size()), 1.0 / q);
}

}  // namespace

TEST_CASE("reference measure construction") {
  CHECK_THROWS_AS(ReferenceMeasure::true_xi(kNormal01, 5000, 1),
                  std::invalid_argument);
  const auto ref = ReferenceMeasure::true_xi(kNormal01, 10000, 1);
  CHECK(ref.oracle_sample.size() == 10000);
  CHECK(std::is_sorted(ref.oracle_sample.begin(), ref.oracle_sample.end()));

  const std::vector<double> sample = {3.0, 1.0, 2.0};
  const auto plug = ReferenceMeasure::plug_in_of(sample);
  CHECK(plug.oracle_sample == std::vector<double>{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(ReferenceMeasure::plug_in_of(std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("marginal projection: boundary orders") {
  const Kernel variance = center(catalog_kernel("variance"), kNormal01, 10000);
  const auto ref = ReferenceMeasure::true_xi(kNormal01, 10000, 2);

  // k = m: the kernel itself, exactly
  const double args[2] = {1.25, -0.5};
  const auto top = marginal_projection(variance, 2, args, ref);
  CHECK(top.value == variance(std::span<const double>(args, 2)));
  CHECK(top.se == 0.0);

  // k = 0: full average, near zero for a centred kernel
  const auto zero = marginal_projection(variance, 0, {}, ref);
  // the oracle mean of h over C(N,2) pairs concentrates at ~1/sqrt(N) scale
  CHECK(std::abs(zero.value) < 0.05);

  CHECK_THROWS_AS(marginal_projection(variance, 3, args, ref),
                  std::invalid_argument);
  CHECK_THROWS_AS(marginal_projection(variance, 1, args, ref),
                  std::invalid_argument);
}

TEST_CASE("marginal projection closed-form checks") {
  SUBCASE("variance kernel under N(0,1): h1(2) = 1.5") {
    const Kernel variance = center(catalog_kernel("variance"), kNormal01, 10000);
    const auto ref = ReferenceMeasure::true_xi(kNormal01, 40000, 3);
    const double x[1] = {2.0};
    const auto est = marginal_projection(variance, 1, x, ref);
    // enumeration over the oracle: error is the oracle's own MC error,
    // sd(h(2, Y)) / sqrt(N) with sd ~= 2.1
    CHECK(std::abs(est.value - 1.5) < 4.0 * 2.2 / std::sqrt(40000.0));
  }
  SUBCASE("gini kernel under U(0,1) at {0, 1/2, 1}") {
    const Kernel gini = center(catalog_kernel("gini"), kUniform01, 10000);
    const auto ref = ReferenceMeasure::true_xi(kUniform01, 40000, 4);
    const double expected[3] = {1.0 / 6.0, -1.0 / 12.0, 1.0 / 6.0};
    const double points[3] = {0.0, 0.5, 1.0};
    for (int i = 0; i < 3; ++i) {
      const double x[1] = {points[i]};
      const auto est = marginal_projection(gini, 1, x, ref);
      CHECK(std::abs(est.value - expected[i]) < 4.0 * 0.3 / std::sqrt(40000.0));
    }
  }
}

TEST_CASE("Monte Carlo projections are deterministic and carry an SE") {
  const Kernel triple = catalog_kernel("triple_product");
  auto ref = ReferenceMeasure::true_xi(kNormal01, 10000, 5);
  ref.enumeration_cap = 1000;  // force the MC path for m-k = 2
  ref.mc_tuples = 20000;
  const double x[1] = {0.7};
  const auto a = marginal_projection(triple, 1, x, ref);
  const auto b = marginal_projection(triple, 1, x, ref);
  CHECK(a.value == b.value);
  CHECK(a.se > 0.0);
  // E[0.7 * Y * Z] = 0
  CHECK(std::abs(a.value) < 5.0 * a.se);
}

TEST_CASE("canonical kernels") {
  const Kernel variance = center(catalog_kernel("variance"), kNormal01, 10000);
  const auto ref = ReferenceMeasure::true_xi(kNormal01, 10000, 6);

  SUBCASE("closed-form h1") {
    const Kernel h1 = canonical_kernel(variance, 1, ref);
    CHECK(h1.degree() == 1);
    for (double x : {-1.0, 0.0, 0.5, 2.0}) {
      CHECK(eval1(h1, x) == doctest::Approx((x * x - 1.0) / 2.0).epsilon(1e-14));
    }
  }

  SUBCASE("oracle h1 agrees with the closed form") {
    auto noisy = ref;
    noisy.use_closed_forms = false;
    const Kernel h1 = canonical_kernel(variance, 1, noisy);
    for (double x : {-1.0, 0.0, 2.0}) {
      CHECK(std::abs(eval1(h1, x) - (x * x - 1.0) / 2.0) < 0.1);
    }
  }

  SUBCASE("h2 = h - h1(x1) - h1(x2) for m = 2") {
    const Kernel h2 = canonical_kernel(variance, 2, ref);
    const Kernel h1 = canonical_kernel(variance, 1, ref);
    for (double x : {-1.0, 0.3}) {
      for (double y : {0.8, 2.0}) {
        const double expect = eval2(variance, x, y) - eval1(h1, x) - eval1(h1, y);
        CHECK(eval2(h2, x, y) == doctest::Approx(expect).epsilon(1e-13));
        // for the variance kernel this collapses to -xy
        CHECK(eval2(h2, x, y) == doctest::Approx(-x * y).epsilon(1e-13));
      }
    }
  }

  SUBCASE("degenerate product kernel: h1 vanishes pointwise") {
    const Kernel product = catalog_kernel("product");
    const Kernel h1 = canonical_kernel(product, 1, ref);
    for (double x : {-1.0, 0.0, 2.0}) CHECK(eval1(h1, x) == 0.0);

    auto noisy = ref;
    noisy.use_closed_forms = false;
    const Kernel h1_mc = canonical_kernel(product, 1, noisy);
    for (double x : {-1.0, 0.0, 2.0}) {
      CHECK(std::abs(eval1(h1_mc, x)) < 0.05);
    }
  }

  CHECK_THROWS_AS(canonical_kernel(variance, 0, ref), std::invalid_argument);
  CHECK_THROWS_AS(canonical_kernel(variance, 3, ref), std::invalid_argument);
}

TEST_CASE("degeneracy order classification") {
  const auto ref = ReferenceMeasure::true_xi(kNormal01, 10000, 7);
  DegeneracyOptions opts;
  opts.probe_size = 1500;
  opts.fresh_tuples = 1500;

  CHECK(degeneracy_order(center(catalog_kernel("variance"), kNormal01, 10000),
                         ref, opts) == 0);
  CHECK(degeneracy_order(catalog_kernel("product"), ref, opts) == 1);
  CHECK(degeneracy_order(catalog_kernel("triple_product"), ref, opts) == 2);

  const Kernel zero("zero", 2, [](std::span<const double>) { return 0.0; },
                    true);
  CHECK(degeneracy_order(zero, ref, opts) == 2);

  SUBCASE("oracle path without closed forms") {
    auto noisy = ref;
    noisy.use_closed_forms = false;
    CHECK(degeneracy_order(catalog_kernel("product"), noisy, opts) == 1);
    CHECK(degeneracy_order(center(catalog_kernel("variance"), kNormal01, 10000),
                           noisy, opts) == 0);
  }

  DegeneracyOptions bad;
  bad.probe_size = 100;
  CHECK_THROWS_AS(degeneracy_order(catalog_kernel("product"), ref, bad),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      degeneracy_order(catalog_kernel("product"),
                       ReferenceMeasure::plug_in_of(std::vector<double>{1.0}),
                       opts),
      std::invalid_argument);
}

TEST_CASE("Jensen contraction and triangle bound for projection norms") {
  const Kernel gini = center(catalog_kernel("gini"), kNormal01, 10000);
  const auto ref = ReferenceMeasure::true_xi(kNormal01, 10000, 8);
  PhiloxStream stream(81, 0, StreamRole::probe);

  const int probes = 4000;
  std::vector<double> h_vals(probes), hk_vals(probes), h1_vals(probes),
      h2_vals(probes);
  for (int p = 0; p < probes; ++p) {
    const auto pair = marginal_sample(kNormal01, 2, stream);
    h_vals[p] = gini(pair);
    const double x[1] = {pair[0]};
    hk_vals[p] = marginal_projection(gini, 1, x, ref).value;
    h1_vals[p] = canonical_eval(gini, 1, x, ref).value;
    h2_vals[p] = canonical_eval(gini, 2, pair, ref).value;
  }

  for (double q : {2.0, 4.0}) {
    const double h_norm = lq_norm(h_vals, q);
    // ||h_k||_q <= ||h||_q (+ MC slack)
    CHECK(lq_norm(hk_vals, q) <= h_norm * (1.0 + 0.1));
    // ||h_i||_q <= 2^m ||h||_q (+ slack)
    CHECK(lq_norm(h1_vals, q) <= 4.0 * h_norm * (1.0 + 0.1));
    CHECK(lq_norm(h2_vals, q) <= 4.0 * h_norm * (1.0 + 0.1));
  }
}

TEST_CASE("canonical components of distinct orders are uncorrelated") {
  // h1 and h2 of the variance kernel over disjoint argument tuples
  const Kernel variance = center(catalog_kernel("variance"), kNormal01, 10000);
  const auto ref = ReferenceMeasure::true_xi(kNormal01, 10000, 9);
  const Kernel h1 = canonical_kernel(variance, 1, ref);
  const Kernel h2 = canonical_kernel(variance, 2, ref);

  PhiloxStream stream(91, 0, StreamRole::probe);
  const int probes = 20000;
  std::vector<double> products(probes);
  double mean1 = 0.0, mean2 = 0.0;
  std::vector<double> a(probes), b(probes);
  for (int p = 0; p < probes; ++p) {
    const auto draws = marginal_sample(kNormal01, 3, stream);
    a[p] = eval1(h1, draws[0]);
    b[p] = eval2(h2, draws[1], draws[2]);
    mean1 += a[p];
    mean2 += b[p];
  }
  mean1 /= probes;
  mean2 /= probes;
  for (int p = 0; p < probes; ++p) products[p] = (a[p] - mean1) * (b[p] - mean2);
  const MeanVar cov = mean_and_variance(products);
  CHECK(std::abs(cov.mean) < 4.0 * cov.se_of_mean());
}
