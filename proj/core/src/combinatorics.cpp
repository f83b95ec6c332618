#include "ustatlab/combinatorics.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace ustatlab {

std::uint64_t binomial_or_max(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;  // exact at every step
    if (c > std::numeric_limits<std::uint64_t>::max())
      return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(c);
}

void first_combination(std::span<std::uint32_t> c) {
  std::iota(c.begin(), c.end(), 0u);
}

bool next_combination(std::span<std::uint32_t> c, std::uint32_t n) {
  const std::uint32_t k = static_cast<std::uint32_t>(c.size());
  if (k == 0) return false;
  std::uint32_t i = k;
  while (i > 0) {
    --i;
    if (c[i] != n - k + i) {
      ++c[i];
      for (std::uint32_t j = i + 1; j < k; ++j) c[j] = c[i] + (j - i);
      return true;
    }
  }
  return false;
}

std::vector<std::uint32_t> unrank_combination(std::uint64_t rank,
                                              std::uint32_t n,
                                              std::uint32_t k) {
  const std::uint64_t total = binomial_or_max(n, k);
  if (rank >= total) throw std::out_of_range("unrank_combination: rank too large");
  std::vector<std::uint32_t> c(k);
  std::uint32_t v = 0;
  for (std::uint32_t j = 0; j < k; ++j) {
    for (;; ++v) {
      const std::uint64_t count = binomial_or_max(n - 1 - v, k - 1 - j);
      if (rank < count) break;
      rank -= count;
    }
    c[j] = v++;
  }
  return c;
}

std::uint64_t colex_rank(std::span<const std::uint32_t> c) {
  std::uint64_t r = 0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    r += binomial_or_max(c[j], static_cast<std::uint64_t>(j) + 1);
  }
  return r;
}

}  // namespace ustatlab
