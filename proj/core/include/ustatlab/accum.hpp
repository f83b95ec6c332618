#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace ustatlab {

// Neumaier variant of Kahan summation. Keeps the running error term in a
// separate compensation word so sums of C(n,m) mixed-sign kernel values
// stay accurate to a few ulps independent of term count.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_mean(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

struct MeanVar {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // denominator count-1 (sample variance)

  double se_of_mean() const {
    return count > 1 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
  }
};

// Two-pass mean/variance with compensated sums.
inline MeanVar mean_and_variance(std::span<const double> xs) {
  MeanVar out;
  out.count = xs.size();
  if (xs.empty()) return out;
  out.mean = compensated_mean(xs);
  if (xs.size() < 2) return out;
  CompensatedSum sq;
  for (double x : xs) {
    double d = x - out.mean;
    sq.add(d * d);
  }
  out.variance = sq.value() / static_cast<double>(xs.size() - 1);
  return out;
}

// Population variance (denominator n): variance of the empirical measure.
inline double population_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  MeanVar mv = mean_and_variance(xs);
  return mv.variance * static_cast<double>(xs.size() - 1) /
         static_cast<double>(xs.size());
}

inline double root_mean_square(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  CompensatedSum s;
  for (double x : xs) s.add(x * x);
  return std::sqrt(s.value() / static_cast<double>(xs.size()));
}

}  // namespace ustatlab
