#include "ustatlab/projections.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "ustatlab/accum.hpp"
#include "ustatlab/combinatorics.hpp"

namespace ustatlab {

namespace {

// Deterministic stream for the Monte Carlo tuples of one projection call,
// keyed by the evaluation point so repeated calls agree bitwise.
PhiloxStream projection_stream(const ReferenceMeasure& ref, int k,
                               std::span<const double> args) {
  std::uint64_t h = fnv1a64(args.data(), args.size() * sizeof(double));
  h = fnv1a64(&k, sizeof(k), h);
  return PhiloxStream(ref.seed, static_cast<std::uint32_t>(h),
                      StreamRole::projection,
                      static_cast<std::uint32_t>((h >> 32) & 0xFFFFFF));
}

// m distinct indices in [0, n), sorted (Floyd's sampling algorithm).
void sample_distinct_indices(std::uint64_t n, std::span<std::uint32_t> out,
                             PhiloxStream& stream) {
  const std::size_t m = out.size();
  std::size_t filled = 0;
  for (std::uint64_t j = n - m; j < n; ++j) {
    const std::uint64_t t = stream.next_below(j + 1);
    bool seen = false;
    for (std::size_t i = 0; i < filled; ++i) {
      if (out[i] == t) {
        seen = true;
        break;
      }
    }
    out[filled++] = static_cast<std::uint32_t>(seen ? j : t);
  }
  std::sort(out.begin(), out.end());
}

}  // namespace

ReferenceMeasure ReferenceMeasure::true_xi(const ProcessSpec& spec,
                                           std::size_t n_ref,
                                           std::uint64_t seed) {
  if (n_ref < 10000)
    throw std::invalid_argument("true_xi reference needs n_ref >= 10^4");
  ReferenceMeasure ref;
  ref.mode = Mode::true_xi;
  ref.source = spec;
  ref.seed = seed;
  PhiloxStream stream(seed, 0, StreamRole::oracle);
  ref.oracle_sample = marginal_sample(spec, n_ref, stream);
  std::sort(ref.oracle_sample.begin(), ref.oracle_sample.end());
  return ref;
}

ReferenceMeasure ReferenceMeasure::plug_in_of(std::span<const double> sample) {
  if (sample.empty())
    throw std::invalid_argument("plug-in reference needs a nonempty sample");
  ReferenceMeasure ref;
  ref.mode = Mode::plug_in;
  ref.oracle_sample.assign(sample.begin(), sample.end());
  std::sort(ref.oracle_sample.begin(), ref.oracle_sample.end());
  return ref;
}

Estimate marginal_projection(const Kernel& kernel, int k,
                             std::span<const double> args,
                             const ReferenceMeasure& ref) {
  const int m = kernel.degree();
  if (k < 0 || k > m)
    throw std::invalid_argument("marginal_projection: k must lie in [0, m]");
  if (static_cast<int>(args.size()) != k)
    throw std::invalid_argument("marginal_projection: args must have length k");
  if (k == m) return {kernel(args), 0.0};

  const std::uint32_t r = static_cast<std::uint32_t>(m - k);
  const auto& oracle = ref.oracle_sample;
  const std::uint32_t n = static_cast<std::uint32_t>(oracle.size());
  if (n < r)
    throw std::invalid_argument("marginal_projection: oracle smaller than m-k");

  std::vector<double> buf(m);
  std::copy(args.begin(), args.end(), buf.begin());

  const std::uint64_t count = binomial_or_max(n, r);
  if (count <= ref.enumeration_cap) {
    std::vector<std::uint32_t> idx(r);
    first_combination(idx);
    CompensatedSum sum;
    do {
      for (std::uint32_t j = 0; j < r; ++j) buf[k + j] = oracle[idx[j]];
      sum.add(kernel(buf));
    } while (next_combination(idx, n));
    return {sum.value() / static_cast<double>(count), 0.0};
  }

  PhiloxStream stream = projection_stream(ref, k, args);
  std::vector<std::uint32_t> idx(r);
  CompensatedSum sum, sumsq;
  const std::uint64_t draws = ref.mc_tuples;
  for (std::uint64_t t = 0; t < draws; ++t) {
    sample_distinct_indices(n, idx, stream);
    for (std::uint32_t j = 0; j < r; ++j) buf[k + j] = oracle[idx[j]];
    const double v = kernel(buf);
    sum.add(v);
    sumsq.add(v * v);
  }
  const double nd = static_cast<double>(draws);
  const double mean = sum.value() / nd;
  const double var =
      std::max(0.0, sumsq.value() / nd - mean * mean) * nd / (nd - 1.0);
  return {mean, std::sqrt(var / nd)};
}

namespace {

// Shared inclusion-exclusion walk over the nonempty argument subsets.
// evaluate(k, sub_args) supplies the projection estimate of order k.
template <typename Eval>
Estimate alternating_sum(int order, std::span<const double> args, Eval&& eval) {
  std::vector<double> sub;
  sub.reserve(order);
  double value = 0.0;
  double var = 0.0;
  const unsigned full = (1u << order) - 1u;
  for (unsigned mask = 1; mask <= full; ++mask) {
    sub.clear();
    for (int b = 0; b < order; ++b) {
      if (mask & (1u << b)) sub.push_back(args[b]);
    }
    const int k = static_cast<int>(sub.size());
    const double sign = ((order - k) % 2 == 0) ? 1.0 : -1.0;
    const Estimate e = eval(k, std::span<const double>(sub));
    value += sign * e.value;
    var += e.se * e.se;
  }
  return {value, std::sqrt(var)};
}

}  // namespace

std::function<double(double)> reference_h1(const Kernel& kernel,
                                           const ReferenceMeasure& ref) {
  if (ref.mode != ReferenceMeasure::Mode::true_xi || !ref.use_closed_forms ||
      !ref.source) {
    return nullptr;
  }
  if (const auto analytic = kernel.analytic_for(*ref.source); analytic) {
    return analytic->h1;
  }
  return nullptr;
}

Estimate canonical_eval(const Kernel& kernel, int i,
                        std::span<const double> args,
                        const ReferenceMeasure& ref) {
  const int m = kernel.degree();
  if (i < 1 || i > m)
    throw std::invalid_argument("canonical_eval: order must lie in [1, m]");
  if (static_cast<int>(args.size()) != i)
    throw std::invalid_argument("canonical_eval: args must have length i");
  const auto h1 = reference_h1(kernel, ref);
  return alternating_sum(i, args,
                         [&](int k, std::span<const double> sub) -> Estimate {
                           if (k == 1 && h1) return {h1(sub[0]), 0.0};
                           return marginal_projection(kernel, k, sub, ref);
                         });
}

Kernel canonical_kernel(const Kernel& kernel, int i,
                        const ReferenceMeasure& ref) {
  const int m = kernel.degree();
  if (i < 1 || i > m)
    throw std::invalid_argument("canonical_kernel: order must lie in [1, m]");

  const auto h1 = reference_h1(kernel, ref);
  if (i == 1 && h1) {
    return Kernel(kernel.name() + "_h1", 1,
                  [h1](std::span<const double> x) { return h1(x[0]); },
                  /*is_symmetric=*/true, kernel.moment_order(),
                  kernel.growth_degree());
  }

  auto shared_ref = std::make_shared<const ReferenceMeasure>(ref);
  Kernel base = kernel;
  auto eval = [base, i, shared_ref, h1](std::span<const double> args) {
    return alternating_sum(
               i, args,
               [&](int k, std::span<const double> sub) -> Estimate {
                 if (k == 1 && h1) return {h1(sub[0]), 0.0};
                 return marginal_projection(base, k, sub, *shared_ref);
               })
        .value;
  };
  return Kernel(kernel.name() + "_h" + std::to_string(i), i, eval,
                /*is_symmetric=*/true, kernel.moment_order(),
                kernel.growth_degree());
}

namespace {

// Projection of order k at fixed args, averaged over `tuples` fresh
// marginal draws. Independent noise across calls, unlike the shared-oracle
// path, which is what the degeneracy test needs.
Estimate fresh_projection(const Kernel& kernel, int k,
                          std::span<const double> args,
                          const ProcessSpec& spec, std::size_t tuples,
                          PhiloxStream& stream) {
  const int m = kernel.degree();
  if (k == m) return {kernel(args), 0.0};
  std::vector<double> buf(m);
  std::copy(args.begin(), args.end(), buf.begin());
  CompensatedSum sum, sumsq;
  for (std::size_t t = 0; t < tuples; ++t) {
    const auto draws = marginal_sample(spec, m - k, stream);
    std::copy(draws.begin(), draws.end(), buf.begin() + k);
    const double v = kernel(buf);
    sum.add(v);
    sumsq.add(v * v);
  }
  const double nd = static_cast<double>(tuples);
  const double mean = sum.value() / nd;
  const double var =
      std::max(0.0, sumsq.value() / nd - mean * mean) * nd / (nd - 1.0);
  return {mean, std::sqrt(var / nd)};
}

}  // namespace

int degeneracy_order(const Kernel& kernel, const ReferenceMeasure& ref,
                     const DegeneracyOptions& options) {
  if (ref.mode != ReferenceMeasure::Mode::true_xi || !ref.source)
    throw std::invalid_argument(
        "degeneracy_order needs a true_xi reference with a process source");
  if (options.probe_size < 1000)
    throw std::invalid_argument("degeneracy_order: probe_size must be >= 10^3");

  const ProcessSpec& spec = *ref.source;
  const int m = kernel.degree();
  const auto h1 = reference_h1(kernel, ref);
  const std::size_t probes = options.probe_size;

  for (int i = 1; i <= m; ++i) {
    PhiloxStream stream(options.seed, static_cast<std::uint32_t>(i),
                        StreamRole::probe);
    std::vector<double> values(probes), noise_vars(probes);
    for (std::size_t p = 0; p < probes; ++p) {
      const auto point = marginal_sample(spec, i, stream);
      const Estimate e = alternating_sum(
          i, point, [&](int k, std::span<const double> sub) -> Estimate {
            if (k == 1 && h1) return {h1(sub[0]), 0.0};
            return fresh_projection(kernel, k, sub, spec,
                                    options.fresh_tuples, stream);
          });
      values[p] = e.value;
      noise_vars[p] = e.se * e.se;
    }

    const double pd = static_cast<double>(probes);
    const MeanVar mv = mean_and_variance(values);
    double fourth = 0.0;
    for (double v : values) {
      const double d = v - mv.mean;
      fourth += d * d * d * d;
    }
    fourth /= pd;
    const MeanVar noise = mean_and_variance(noise_vars);

    // Unbiased component variance: spread of the probe values minus the
    // average per-probe estimation noise.
    const double corrected = mv.variance - noise.mean;
    const double se = std::sqrt(
        std::max(0.0, fourth - mv.variance * mv.variance) / pd +
        (probes > 1 ? noise.variance / pd : 0.0));
    if (corrected > 5.0 * se && corrected > 0.0) return i - 1;
  }
  return m;
}

}  // namespace ustatlab
