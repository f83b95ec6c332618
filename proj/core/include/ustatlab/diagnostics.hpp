#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ustatlab/kernels.hpp"
#include "ustatlab/processes.hpp"
#include "ustatlab/projections.hpp"
#include "ustatlab/ustat.hpp"
#include "ustatlab/wasserstein.hpp"

namespace ustatlab {

struct LongRunVariance {
  double value = 0.0;  // gamma_0 + 2 sum_k w_k gamma_k of the input series
  double se = 0.0;     // batch-means standard error
  int max_lag = 0;
};

// Bartlett-weighted long-run variance of h1 values with L = floor(n^(1/3))
// unless overridden; SE from floor(sqrt(n)) batch estimates. The caller
// multiplies by m^2 to get the limit variance of m sqrt(n) U^(1).
LongRunVariance long_run_variance_estimate(std::span<const double> h1_values,
                                           int max_lag = -1);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

// Least-squares line of log(y) on log(x); nullopt when any y <= 0 (slope
// undefined for identically-zero components).
std::optional<LineFit> fit_log_log(std::span<const double> x,
                                   std::span<const double> y);

struct RateFitOrder {
  int order = 0;
  std::vector<double> rms;          // per n, across replications
  std::optional<LineFit> fit;       // absent when the component vanishes
};

struct RateFit {
  std::vector<long> n_grid;
  std::vector<RateFitOrder> orders;
};

struct RateOptions {
  int replications = 200;
  std::uint64_t seed = 1;
  UStatOptions ustat;
  unsigned threads = 0;
};

// ||U^(i)||_L2 estimated as the RMS of component U-statistics across
// replications, per n, then regressed on log n. The grid must have >= 4
// strictly increasing points spanning at least one decade.
RateFit rate_regression(const Kernel& centred_kernel, const ProcessSpec& spec,
                        std::span<const int> orders,
                        std::span<const long> n_grid,
                        const ReferenceMeasure& ref,
                        const RateOptions& options);

struct SecondMomentPoint {
  long n = 0;
  double mean_square = 0.0;
  double se = 0.0;
};

// Per-n mean of squared statistics (>= 100 replications each).
std::vector<SecondMomentPoint> second_moment_trajectory(
    const std::vector<std::pair<long, EmpiricalDistribution>>& replicated);

struct UIPoint {
  double threshold = 0.0;
  double sup_tail_second_moment = 0.0;
};

// For each threshold K (ascending): max over n of mean(Y^2 1{|Y| > K}).
// Nonincreasing in K by construction.
std::vector<UIPoint> uniform_integrability_profile(
    const std::vector<std::pair<long, EmpiricalDistribution>>& replicated,
    std::span<const double> thresholds);

struct LindebergPoint {
  long n = 0;
  double ratio = 0.0;
  double se = 0.0;
};

// Lindeberg ratios L_n(eps) = E[h1^2 1{|h1| > eps s_n}] / Var(h1), with
// s_n^2 = n Var(h1), estimated from an i.i.d. pool of h1 values. Refuses
// mixing processes: the condition's scope is the i.i.d. case.
std::vector<LindebergPoint> lindeberg_ratio(const ProcessSpec& spec,
                                            std::span<const double> h1_values,
                                            std::span<const long> n_grid,
                                            double epsilon);

// Bootstrap standard error of w2_empirical_gaussian under resampling of
// the replication values.
double bootstrap_w2_se(std::span<const double> values, double sigma,
                       int resamples, std::uint64_t seed);

}  // namespace ustatlab
