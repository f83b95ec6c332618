#include "ustatlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ustatlab/accum.hpp"
#include "ustatlab/parallel.hpp"

namespace ustatlab {

namespace {

double bartlett_value(std::span<const double> xs, int max_lag) {
  const std::size_t n = xs.size();
  const double mean = compensated_mean(xs);
  std::vector<double> centred(n);
  for (std::size_t t = 0; t < n; ++t) centred[t] = xs[t] - mean;

  auto gamma = [&](int k) {
    CompensatedSum s;
    for (std::size_t t = 0; t + k < n; ++t) s.add(centred[t] * centred[t + k]);
    return s.value() / static_cast<double>(n);
  };

  double value = gamma(0);
  for (int k = 1; k <= max_lag; ++k) {
    const double w =
        1.0 - static_cast<double>(k) / static_cast<double>(max_lag + 1);
    value += 2.0 * w * gamma(k);
  }
  return value;
}

}  // namespace

LongRunVariance long_run_variance_estimate(std::span<const double> h1_values,
                                           int max_lag) {
  const std::size_t n = h1_values.size();
  if (n < 200)
    throw std::invalid_argument(
        "long_run_variance_estimate: needs at least 200 values");
  const int lag =
      max_lag >= 0 ? max_lag : static_cast<int>(std::cbrt(static_cast<double>(n)));

  LongRunVariance out;
  out.max_lag = lag;
  out.value = bartlett_value(h1_values, lag);

  // Batch means: the same estimator on floor(sqrt(n)) batches.
  const std::size_t num_batches =
      static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  const std::size_t batch_len = n / num_batches;
  if (num_batches >= 2 && batch_len >= 8) {
    std::vector<double> batch(num_batches);
    for (std::size_t b = 0; b < num_batches; ++b) {
      const auto slice = h1_values.subspan(b * batch_len, batch_len);
      const int batch_lag =
          std::min<int>(lag, static_cast<int>(std::cbrt(
                                 static_cast<double>(batch_len))));
      batch[b] = bartlett_value(slice, batch_lag);
    }
    const MeanVar mv = mean_and_variance(batch);
    out.se = std::sqrt(mv.variance / static_cast<double>(num_batches));
  }
  return out;
}

std::optional<LineFit> fit_log_log(std::span<const double> x,
                                   std::span<const double> y) {
  const std::size_t k = x.size();
  if (k != y.size() || k < 3)
    throw std::invalid_argument("fit_log_log: needs >= 3 matched points");
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(x[i] > 0.0)) throw std::invalid_argument("fit_log_log: x must be > 0");
    if (!(y[i] > 0.0)) return std::nullopt;
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = compensated_mean(lx);
  const double my = compensated_mean(ly);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.slope_se = k > 2 ? std::sqrt(rss / static_cast<double>(k - 2) / sxx) : 0.0;
  return fit;
}

RateFit rate_regression(const Kernel& centred_kernel, const ProcessSpec& spec,
                        std::span<const int> orders,
                        std::span<const long> n_grid,
                        const ReferenceMeasure& ref,
                        const RateOptions& options) {
  if (orders.empty()) throw std::invalid_argument("nothing to fit: empty orders");
  if (n_grid.size() < 4)
    throw std::invalid_argument("rate grid needs at least 4 points");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("rate grid must be strictly increasing");
  }
  if (n_grid.back() < 10 * n_grid.front())
    throw std::invalid_argument("rate grid must span at least one decade");
  if (options.replications < 2)
    throw std::invalid_argument("rate_regression: needs >= 2 replications");

  RateFit out;
  out.n_grid.assign(n_grid.begin(), n_grid.end());

  for (int order : orders) {
    if (order < 1 || order > centred_kernel.degree())
      throw std::invalid_argument("rate order out of range");
    const Kernel canonical = canonical_kernel(centred_kernel, order, ref);

    RateFitOrder fit_order;
    fit_order.order = order;
    fit_order.rms.resize(n_grid.size());
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
      const long n = n_grid[g];
      const int reps = options.replications;
      std::vector<double> values(reps);
      parallel_for_index(
          reps,
          [&](std::size_t r) {
            const std::uint32_t stream_id =
                static_cast<std::uint32_t>(g * static_cast<std::size_t>(reps) + r);
            PhiloxStream stream(options.seed, stream_id, StreamRole::path);
            const auto path =
                sample_path(spec, static_cast<std::size_t>(n), stream);
            values[r] = component_ustat(order, canonical, path, options.ustat);
          },
          options.threads);
      fit_order.rms[g] = root_mean_square(values);
    }

    std::vector<double> xs(n_grid.size());
    for (std::size_t g = 0; g < n_grid.size(); ++g)
      xs[g] = static_cast<double>(n_grid[g]);
    fit_order.fit = fit_log_log(xs, fit_order.rms);
    out.orders.push_back(std::move(fit_order));
  }
  return out;
}

std::vector<SecondMomentPoint> second_moment_trajectory(
    const std::vector<std::pair<long, EmpiricalDistribution>>& replicated) {
  std::vector<SecondMomentPoint> out;
  out.reserve(replicated.size());
  for (const auto& [n, dist] : replicated) {
    if (dist.size() < 100)
      throw std::invalid_argument(
          "second_moment_trajectory: needs >= 100 replications per n");
    std::vector<double> squares;
    squares.reserve(dist.size());
    for (double v : dist.values()) squares.push_back(v * v);
    const MeanVar mv = mean_and_variance(squares);
    out.push_back({n, mv.mean, mv.se_of_mean()});
  }
  return out;
}

std::vector<UIPoint> uniform_integrability_profile(
    const std::vector<std::pair<long, EmpiricalDistribution>>& replicated,
    std::span<const double> thresholds) {
  if (replicated.empty())
    throw std::invalid_argument("uniform_integrability_profile: no data");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] < thresholds[i - 1])
      throw std::invalid_argument("thresholds must be ascending");
  }
  std::vector<UIPoint> out;
  out.reserve(thresholds.size());
  for (double k : thresholds) {
    double sup = 0.0;
    for (const auto& [n, dist] : replicated) {
      CompensatedSum s;
      for (double v : dist.values()) {
        if (std::abs(v) > k) s.add(v * v);
      }
      sup = std::max(sup, s.value() / static_cast<double>(dist.size()));
    }
    out.push_back({k, sup});
  }
  return out;
}

std::vector<LindebergPoint> lindeberg_ratio(const ProcessSpec& spec,
                                            std::span<const double> h1_values,
                                            std::span<const long> n_grid,
                                            double epsilon) {
  if (!spec.is_iid())
    throw std::invalid_argument(
        "lindeberg_ratio: defined for i.i.d. processes only");
  if (h1_values.size() < 1000)
    throw std::invalid_argument("lindeberg_ratio: pool too small");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("lindeberg_ratio: epsilon must be > 0");

  const MeanVar mv = mean_and_variance(h1_values);
  if (!(mv.variance > 0.0))
    throw std::invalid_argument("lindeberg_ratio: degenerate h1 pool");

  std::vector<LindebergPoint> out;
  out.reserve(n_grid.size());
  const double pool = static_cast<double>(h1_values.size());
  for (long n : n_grid) {
    const double s_n = std::sqrt(static_cast<double>(n) * mv.variance);
    const double cut = epsilon * s_n;
    CompensatedSum sum, sumsq;
    for (double v : h1_values) {
      const double t = std::abs(v) > cut ? v * v : 0.0;
      sum.add(t);
      sumsq.add(t * t);
    }
    const double mean = sum.value() / pool;
    const double var =
        std::max(0.0, sumsq.value() / pool - mean * mean) * pool / (pool - 1.0);
    out.push_back({n, mean / mv.variance, std::sqrt(var / pool) / mv.variance});
  }
  return out;
}

double bootstrap_w2_se(std::span<const double> values, double sigma,
                       int resamples, std::uint64_t seed) {
  if (values.empty() || resamples < 2)
    throw std::invalid_argument("bootstrap_w2_se: bad inputs");
  PhiloxStream stream(seed, 0, StreamRole::subsets);
  const std::size_t n = values.size();
  std::vector<double> stats(resamples);
  std::vector<double> draw(n);
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i)
      draw[i] = values[stream.next_below(n)];
    stats[b] = w2_empirical_gaussian(EmpiricalDistribution(draw), sigma);
  }
  const MeanVar mv = mean_and_variance(stats);
  return std::sqrt(mv.variance);
}

}  // namespace ustatlab
