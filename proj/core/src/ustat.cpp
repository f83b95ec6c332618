#include "ustatlab/ustat.hpp"

#include <algorithm>
#include <cmath>

#include "ustatlab/accum.hpp"
#include "ustatlab/combinatorics.hpp"
#include "ustatlab/parallel.hpp"

namespace ustatlab {

namespace {

void check_sample(const Kernel& kernel, std::span<const double> sample) {
  if (sample.size() < static_cast<std::size_t>(kernel.degree()))
    throw std::invalid_argument("sample smaller than degree (n=" +
                                std::to_string(sample.size()) + ", m=" +
                                std::to_string(kernel.degree()) + ")");
}

struct ChunkResult {
  CompensatedSum sum;
  double max_abs = 0.0;
};

}  // namespace

UStatDetail u_statistic_exact_detail(const Kernel& kernel,
                                     std::span<const double> sample,
                                     const UStatOptions& options) {
  check_sample(kernel, sample);
  const std::uint32_t n = static_cast<std::uint32_t>(sample.size());
  const std::uint32_t m = static_cast<std::uint32_t>(kernel.degree());
  const std::uint64_t total = binomial_or_max(n, m);
  if (total > options.enumeration_cap)
    throw EnumerationCapExceeded(
        "C(n,m) = " + std::to_string(total) + " exceeds enumeration cap " +
        std::to_string(options.enumeration_cap) +
        "; use u_statistic_incomplete");

  const unsigned chunks =
      std::max<unsigned>(1, std::min<std::uint64_t>(options.num_chunks, total));
  std::vector<ChunkResult> partial(chunks);

  parallel_for_index(
      chunks,
      [&](std::size_t c) {
        const std::uint64_t begin = total * c / chunks;
        const std::uint64_t end = total * (c + 1) / chunks;
        if (begin >= end) return;
        std::vector<std::uint32_t> idx = unrank_combination(begin, n, m);
        std::vector<double> buf(m);
        ChunkResult& out = partial[c];
        for (std::uint64_t r = begin; r < end; ++r) {
          for (std::uint32_t j = 0; j < m; ++j) buf[j] = sample[idx[j]];
          const double v = kernel(buf);
          out.sum.add(v);
          out.max_abs = std::max(out.max_abs, std::abs(v));
          if (r + 1 < end) next_combination(std::span<std::uint32_t>(idx), n);
        }
      },
      options.threads);

  CompensatedSum sum;
  double max_abs = 0.0;
  for (const ChunkResult& c : partial) {
    sum.add(c.sum);
    max_abs = std::max(max_abs, c.max_abs);
  }
  return {sum.value() / static_cast<double>(total), max_abs, total};
}

double u_statistic_exact(const Kernel& kernel, std::span<const double> sample,
                         const UStatOptions& options) {
  return u_statistic_exact_detail(kernel, sample, options).value;
}

IncompleteUStat u_statistic_incomplete(const Kernel& kernel,
                                       std::span<const double> sample,
                                       std::uint64_t num_subsets,
                                       PhiloxStream& stream) {
  check_sample(kernel, sample);
  if (num_subsets < 100)
    throw std::invalid_argument("u_statistic_incomplete: num_subsets >= 100");
  const std::uint32_t m = static_cast<std::uint32_t>(kernel.degree());
  const std::uint64_t n = sample.size();

  std::vector<std::uint32_t> idx(m);
  std::vector<double> buf(m);
  CompensatedSum sum, sumsq;
  for (std::uint64_t t = 0; t < num_subsets; ++t) {
    // m distinct indices, sorted (Floyd's sampling).
    std::size_t filled = 0;
    for (std::uint64_t j = n - m; j < n; ++j) {
      const std::uint64_t u = stream.next_below(j + 1);
      bool seen = false;
      for (std::size_t i = 0; i < filled; ++i) {
        if (idx[i] == u) {
          seen = true;
          break;
        }
      }
      idx[filled++] = static_cast<std::uint32_t>(seen ? j : u);
    }
    std::sort(idx.begin(), idx.end());
    for (std::uint32_t j = 0; j < m; ++j) buf[j] = sample[idx[j]];
    const double v = kernel(buf);
    sum.add(v);
    sumsq.add(v * v);
  }
  const double k = static_cast<double>(num_subsets);
  const double mean = sum.value() / k;
  const double var =
      std::max(0.0, sumsq.value() / k - mean * mean) * k / (k - 1.0);
  return {mean, std::sqrt(var / k), num_subsets};
}

double component_ustat(int i, const Kernel& canonical,
                       std::span<const double> sample,
                       const UStatOptions& options) {
  if (canonical.degree() != i)
    throw std::invalid_argument(
        "component_ustat: canonical kernel degree " +
        std::to_string(canonical.degree()) + " does not match order " +
        std::to_string(i));
  return u_statistic_exact(canonical, sample, options);
}

double HoeffdingComponents::reconstruct() const {
  CompensatedSum sum;
  for (int i = 1; i <= m; ++i) {
    sum.add(static_cast<double>(binomial_weights[i - 1]) * components[i - 1]);
  }
  return sum.value();
}

HoeffdingComponents hoeffding_reconstruct(const Kernel& kernel,
                                          std::span<const double> sample,
                                          const ReferenceMeasure& ref,
                                          const UStatOptions& options) {
  check_sample(kernel, sample);
  const std::uint32_t n = static_cast<std::uint32_t>(sample.size());
  const int m = kernel.degree();

  HoeffdingComponents out;
  out.n = n;
  out.m = m;
  const UStatDetail detail = u_statistic_exact_detail(kernel, sample, options);
  out.u_exact = detail.value;
  out.scale = std::max(1.0, detail.max_abs_eval);

  // Projection tables at the sample's index tuples, keyed by colex rank.
  // Each h_k value is computed once; components then reuse the same
  // floating value everywhere, which is what makes the weighted sum
  // reproduce U_h identically. The identity is algebraic in the table
  // values, so closed-form h1 (true-xi mode) plugs in transparently.
  const auto h1 = reference_h1(kernel, ref);
  std::vector<std::vector<double>> tables(m);  // tables[k-1] for k = 1..m-1
  std::vector<double> args;
  for (int k = 1; k < m; ++k) {
    const std::uint64_t count = binomial_or_max(n, k);
    if (count > options.enumeration_cap)
      throw EnumerationCapExceeded(
          "projection table for order " + std::to_string(k) +
          " would need " + std::to_string(count) + " entries");
    auto& table = tables[k - 1];
    table.resize(count);
    std::vector<std::uint32_t> idx(k);
    first_combination(idx);
    args.resize(k);
    std::uint64_t rank = 0;
    do {
      for (int j = 0; j < k; ++j) args[j] = sample[idx[j]];
      table[rank++] = (k == 1 && h1)
                          ? h1(args[0])
                          : marginal_projection(kernel, k, args, ref).value;
    } while (next_combination(std::span<std::uint32_t>(idx), n));
  }

  out.binomial_weights.resize(m);
  out.components.resize(m);
  std::vector<std::uint32_t> subset;
  for (int i = 1; i <= m; ++i) {
    out.binomial_weights[i - 1] = binomial_or_max(m, i);
    const std::uint64_t total = binomial_or_max(n, i);
    if (total > options.enumeration_cap)
      throw EnumerationCapExceeded("component order " + std::to_string(i) +
                                   " needs " + std::to_string(total) +
                                   " tuples");
    std::vector<std::uint32_t> idx(i);
    first_combination(idx);
    std::vector<double> buf(i);
    CompensatedSum sum;
    const unsigned full = (1u << i) - 1u;
    do {
      // h_i at this tuple: alternating sum over nonempty sub-tuples, with
      // the constant term 0 by centring.
      CompensatedSum hi;
      for (unsigned mask = 1; mask <= full; ++mask) {
        subset.clear();
        for (int b = 0; b < i; ++b) {
          if (mask & (1u << b)) subset.push_back(idx[b]);
        }
        const int k = static_cast<int>(subset.size());
        const double sign = ((i - k) % 2 == 0) ? 1.0 : -1.0;
        double value;
        if (k == m) {
          buf.resize(m);
          for (int j = 0; j < m; ++j) buf[j] = sample[subset[j]];
          value = kernel(buf);
        } else {
          value = tables[k - 1][colex_rank(subset)];
        }
        hi.add(sign * value);
      }
      sum.add(hi.value());
    } while (next_combination(std::span<std::uint32_t>(idx), n));
    out.components[i - 1] = sum.value() / static_cast<double>(total);
  }
  return out;
}

}  // namespace ustatlab
