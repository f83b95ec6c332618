#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ustatlab {

// C(n,k), saturating to UINT64_MAX instead of overflowing.
std::uint64_t binomial_or_max(std::uint64_t n, std::uint64_t k);

// Lexicographic iteration over strictly increasing index k-tuples in [0,n).
// first_combination fills {0,1,...,k-1}; next_combination advances in place
// and returns false after the last combination.
void first_combination(std::span<std::uint32_t> c);
bool next_combination(std::span<std::uint32_t> c, std::uint32_t n);

// Lexicographic unranking: the rank-th combination (0-based) of k out of n.
std::vector<std::uint32_t> unrank_combination(std::uint64_t rank,
                                              std::uint32_t n,
                                              std::uint32_t k);

// Colexicographic rank of a sorted index tuple: sum_j C(c[j], j+1).
// Bijection onto [0, C(n,k)); used as a table key for projection caches.
std::uint64_t colex_rank(std::span<const std::uint32_t> c);

}  // namespace ustatlab
