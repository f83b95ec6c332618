#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ustatlab/kernels.hpp"
#include "ustatlab/projections.hpp"
#include "ustatlab/rng.hpp"

namespace ustatlab {

// Raised when C(n,m) exceeds the enumeration cap; callers should switch to
// u_statistic_incomplete.
class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UStatOptions {
  std::uint64_t enumeration_cap = 20000000;
  // Number of contiguous combinadic ranges summed independently (in
  // parallel) and combined in range order. Part of the reproducibility
  // key: results are bitwise-stable for a fixed chunk count, for any
  // thread count.
  unsigned num_chunks = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct UStatDetail {
  double value = 0.0;
  double max_abs_eval = 0.0;
  std::uint64_t num_tuples = 0;
};

// Average of the kernel over all strictly increasing index m-tuples.
double u_statistic_exact(const Kernel& kernel, std::span<const double> sample,
                         const UStatOptions& options = {});
UStatDetail u_statistic_exact_detail(const Kernel& kernel,
                                     std::span<const double> sample,
                                     const UStatOptions& options = {});

struct IncompleteUStat {
  double estimate = 0.0;
  double mc_se = 0.0;
  std::uint64_t num_subsets = 0;
};

// Average over num_subsets index m-tuples, each drawn uniformly without
// replacement within the tuple, with replacement across tuples.
IncompleteUStat u_statistic_incomplete(const Kernel& kernel,
                                       std::span<const double> sample,
                                       std::uint64_t num_subsets,
                                       PhiloxStream& stream);

// U-statistic of a canonical kernel of order i over the sample.
double component_ustat(int i, const Kernel& canonical,
                       std::span<const double> sample,
                       const UStatOptions& options = {});

struct HoeffdingComponents {
  std::size_t n = 0;
  int m = 0;
  std::vector<double> components;              // U^(1)..U^(m)
  std::vector<std::uint64_t> binomial_weights; // C(m,1)..C(m,m)
  double u_exact = 0.0;  // U_h on the same sample
  double scale = 1.0;    // max(1, max |h| seen during enumeration)

  double reconstruct() const;  // sum_i C(m,i) U^(i)
};

// All component U-statistics of the Hoeffding decomposition, with the
// projections memoized at the sample's index tuples so every h_k value is
// evaluated once and reused bit-identically. In plug-in mode the weighted
// component sum equals U_h up to floating accumulation error.
HoeffdingComponents hoeffding_reconstruct(const Kernel& kernel,
                                          std::span<const double> sample,
                                          const ReferenceMeasure& ref,
                                          const UStatOptions& options = {});

}  // namespace ustatlab
