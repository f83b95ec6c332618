#include "ustatlab/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ustatlab/accum.hpp"

namespace ustatlab {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> values)
    : sorted_(std::move(values)) {
  if (sorted_.empty())
    throw std::invalid_argument("EmpiricalDistribution: empty sample");
  for (double v : sorted_) {
    if (!std::isfinite(v))
      throw std::invalid_argument("EmpiricalDistribution: non-finite value");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::quantile(double u) const {
  const std::size_t n = sorted_.size();
  if (u <= 0.0) return sorted_.front();
  if (u >= 1.0) return sorted_.back();
  // index i with u in ((i-1)/n, i/n]
  std::size_t i = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n)));
  if (i == 0) i = 1;
  if (i > n) i = n;
  return sorted_[i - 1];
}

double EmpiricalDistribution::mean() const { return compensated_mean(sorted_); }

double EmpiricalDistribution::second_moment() const {
  CompensatedSum s;
  for (double v : sorted_) s.add(v * v);
  return s.value() / static_cast<double>(sorted_.size());
}

double w2_empirical_empirical(const EmpiricalDistribution& a,
                              const EmpiricalDistribution& b) {
  const auto va = a.values();
  const auto vb = b.values();
  const std::size_t na = va.size();
  const std::size_t nb = vb.size();
  CompensatedSum cost;

  if (na == nb) {
    for (std::size_t i = 0; i < na; ++i) {
      const double d = va[i] - vb[i];
      cost.add(d * d);
    }
    return std::sqrt(std::max(0.0, cost.value() / static_cast<double>(na)));
  }

  // Common refinement of the grids {i/na} and {j/nb}. Breakpoints are
  // compared as exact integer fractions i*nb vs j*na.
  std::size_t i = 1, j = 1;
  double prev = 0.0;
  while (i <= na || j <= nb) {
    const double qa = va[std::min(i, na) - 1];
    const double qb = vb[std::min(j, nb) - 1];
    const std::uint64_t lhs = static_cast<std::uint64_t>(i) * nb;
    const std::uint64_t rhs = static_cast<std::uint64_t>(j) * na;
    double next;
    if (lhs <= rhs) next = static_cast<double>(i) / static_cast<double>(na);
    if (rhs <= lhs) next = static_cast<double>(j) / static_cast<double>(nb);
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
    const double d = qa - qb;
    cost.add(d * d * (next - prev));
    prev = next;
  }
  return std::sqrt(std::max(0.0, cost.value()));
}

double w2_empirical_gaussian(const EmpiricalDistribution& a, double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("w2_empirical_gaussian: sigma must be > 0");
  const auto v = a.values();
  const std::size_t n = v.size();

  // d2^2 = mean(a^2) + sigma^2 - 2 sigma sum_i a_(i) (phi(z_{i-1}) - phi(z_i))
  // with z_i = Phi^{-1}(i/n); the density vanishes at both improper ends.
  CompensatedSum cross;
  double phi_prev = 0.0;  // phi(z_0), z_0 = -inf
  for (std::size_t i = 1; i <= n; ++i) {
    const double phi_cur =
        i == n ? 0.0
               : normal_pdf(inverse_normal_cdf(static_cast<double>(i) /
                                               static_cast<double>(n)));
    cross.add(v[i - 1] * (phi_prev - phi_cur));
    phi_prev = phi_cur;
  }
  const double d2sq =
      a.second_moment() + sigma * sigma - 2.0 * sigma * cross.value();
  return std::sqrt(std::max(0.0, d2sq));
}

double w2_gaussian_gaussian(double sigma_a, double sigma_b) {
  if (!(sigma_a > 0.0) || !(sigma_b > 0.0))
    throw std::invalid_argument("w2_gaussian_gaussian: sigmas must be > 0");
  return std::abs(sigma_a - sigma_b);
}

}  // namespace ustatlab
