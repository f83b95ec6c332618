#pragma once

#include <span>
#include <vector>

#include "ustatlab/normal.hpp"

namespace ustatlab {

// A sorted real sample with quantile-function access: the quantile at
// u in ((i-1)/n, i/n] is the i-th order statistic.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> values);

  std::span<const double> values() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }
  double quantile(double u) const;

  double mean() const;
  double second_moment() const;

 private:
  std::vector<double> sorted_;
};

// Exact W2 between two empirical laws: the L2 distance between quantile
// functions, integrated over the common refinement of the two uniform
// grids (reduces to the sorted pairing for equal sizes).
double w2_empirical_empirical(const EmpiricalDistribution& a,
                              const EmpiricalDistribution& b);

// Exact W2 between an empirical law and N(0, sigma^2): per-cell closed
// forms of the Gaussian quantile integral; the extreme cells use the
// convergent improper integrals, no tail truncation.
double w2_empirical_gaussian(const EmpiricalDistribution& a, double sigma);

// W2 between centred Gaussians: |sigma_a - sigma_b|.
double w2_gaussian_gaussian(double sigma_a, double sigma_b);

}  // namespace ustatlab
