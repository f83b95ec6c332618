#include "ustatlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ustatlab/accum.hpp"
#include "ustatlab/normal.hpp"

namespace ustatlab {

Kernel::Kernel(std::string name, int degree, Eval raw_eval, bool is_symmetric,
               double moment_order, double growth_degree,
               AnalyticProvider analytic)
    : name_(std::move(name)),
      degree_(degree),
      raw_(std::move(raw_eval)),
      is_symmetric_(is_symmetric),
      moment_order_(moment_order),
      growth_degree_(growth_degree),
      analytic_(std::move(analytic)) {
  if (degree_ < 1) throw std::invalid_argument("kernel degree must be >= 1");
  if (!raw_) throw std::invalid_argument("kernel needs an evaluation function");
  if (!(moment_order_ >= 2.0))
    throw std::invalid_argument("kernel moment order must be >= 2");
}

double Kernel::raw(std::span<const double> args) const {
  if (static_cast<int>(args.size()) != degree_)
    throw std::invalid_argument("kernel '" + name_ + "' expects " +
                                std::to_string(degree_) + " arguments");
  return raw_(args);
}

double Kernel::operator()(std::span<const double> args) const {
  return raw(args) - centering_offset_;
}

std::optional<KernelAnalytic> Kernel::analytic_for(const ProcessSpec& ref) const {
  if (!analytic_) return std::nullopt;
  return analytic_(ref);
}

Kernel Kernel::with_offset(double offset) const {
  Kernel copy = *this;
  copy.centering_offset_ = offset;
  return copy;
}

Kernel Kernel::with_moment_order(double p) const {
  Kernel copy = *this;
  if (!(p >= 2.0)) throw std::invalid_argument("kernel moment order must be >= 2");
  copy.moment_order_ = p;
  return copy;
}

Kernel symmetrize(const std::string& name, int degree,
                  const Kernel::Eval& raw_kernel) {
  if (degree < 1) throw std::invalid_argument("symmetrize: degree must be >= 1");
  if (degree > 8)
    throw std::invalid_argument(
        "symmetrize: degree > 8 rejected (m! evaluations per call); "
        "pre-symmetrize the kernel instead");
  auto eval = [raw_kernel, degree](std::span<const double> args) -> double {
    std::array<int, 8> perm{};
    std::iota(perm.begin(), perm.begin() + degree, 0);
    std::array<double, 8> buf{};
    CompensatedSum sum;
    std::size_t count = 0;
    do {
      for (int i = 0; i < degree; ++i) buf[i] = args[perm[i]];
      sum.add(raw_kernel(std::span<const double>(buf.data(), degree)));
      ++count;
    } while (std::next_permutation(perm.begin(), perm.begin() + degree));
    return sum.value() / static_cast<double>(count);
  };
  return Kernel(name, degree, eval, /*is_symmetric=*/true);
}

CenterResult center_detail(const Kernel& kernel, const ProcessSpec& reference,
                           std::size_t mc_size, std::uint64_t seed) {
  reference.validate();
  if (const auto analytic = kernel.analytic_for(reference);
      analytic && analytic->theta_raw) {
    return {kernel.with_offset(*analytic->theta_raw), *analytic->theta_raw, 0.0,
            true};
  }
  if (mc_size < 10000)
    throw std::invalid_argument("center: mc_size must be >= 10^4");

  const int m = kernel.degree();
  PhiloxStream stream(seed, 0, StreamRole::centering);
  CompensatedSum sum, sumsq;
  for (std::size_t i = 0; i < mc_size; ++i) {
    const auto draws = marginal_sample(reference, m, stream);
    const double v = kernel(draws);  // residual mean of the current kernel
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "center: kernel '" << kernel.name() << "' returned non-finite value at (";
      for (int j = 0; j < m; ++j) os << (j ? "," : "") << draws[j];
      os << ")";
      throw std::runtime_error(os.str());
    }
    sum.add(v);
    sumsq.add(v * v);
  }
  const double nmc = static_cast<double>(mc_size);
  const double mean = sum.value() / nmc;
  const double var = std::max(0.0, (sumsq.value() / nmc - mean * mean)) * nmc / (nmc - 1.0);
  const double se = std::sqrt(var / nmc);
  const double offset = kernel.centering_offset() + mean;
  return {kernel.with_offset(offset), offset, se, false};
}

Kernel center(const Kernel& kernel, const ProcessSpec& reference,
              std::size_t mc_size, std::uint64_t seed) {
  return center_detail(kernel, reference, mc_size, seed).kernel;
}

namespace {

std::optional<KernelAnalytic> mean_analytic(const ProcessSpec& ref) {
  KernelAnalytic a;
  const double mu = ref.marginal_mean();
  a.theta_raw = mu;
  a.h1 = [mu](double x) { return x - mu; };
  a.var_h1 = ref.marginal_variance();
  a.h1_is_identity = true;
  return a;
}

std::optional<KernelAnalytic> variance_analytic(const ProcessSpec& ref) {
  KernelAnalytic a;
  const double mu = ref.marginal_mean();
  const double v = ref.marginal_variance();
  a.theta_raw = v;  // E (X-Y)^2 / 2 = Var X for independent X, Y
  a.h1 = [mu, v](double x) {
    const double d = x - mu;
    return 0.5 * (d * d - v);
  };
  if (const auto mu4 = ref.marginal_central_fourth()) {
    a.var_h1 = 0.25 * (*mu4 - v * v);
  }
  return a;
}

std::optional<KernelAnalytic> gini_analytic(const ProcessSpec& ref) {
  KernelAnalytic a;
  switch (ref.marginal_kind()) {
    case MarginalKind::uniform: {
      const double w = ref.hi - ref.lo, lo = ref.lo;
      a.theta_raw = w / 3.0;
      a.h1 = [w, lo](double x) {
        const double t = (x - lo) / w;
        return w * (t * t - t + 1.0 / 6.0);
      };
      a.var_h1 = w * w / 180.0;
      return a;
    }
    case MarginalKind::normal: {
      const double mu = ref.marginal_mean();
      const double sd = std::sqrt(ref.marginal_variance());
      const double theta = 2.0 * sd / std::sqrt(M_PI);
      a.theta_raw = theta;
      a.h1 = [mu, sd, theta](double x) {
        const double t = (x - mu) / sd;
        return sd * (2.0 * normal_pdf(t) + t * (2.0 * normal_cdf(t) - 1.0)) - theta;
      };
      return a;  // var_h1 left open; estimated downstream
    }
    case MarginalKind::pareto:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<KernelAnalytic> product_analytic(const ProcessSpec& ref) {
  KernelAnalytic a;
  const double mu = ref.marginal_mean();
  const double v = ref.marginal_variance();
  a.theta_raw = mu * mu;
  a.h1 = [mu](double x) { return mu * (x - mu); };
  a.var_h1 = mu * mu * v;
  return a;
}

std::optional<KernelAnalytic> triple_product_analytic(const ProcessSpec& ref) {
  KernelAnalytic a;
  const double mu = ref.marginal_mean();
  const double v = ref.marginal_variance();
  a.theta_raw = mu * mu * mu;
  a.h1 = [mu](double x) { return mu * mu * (x - mu); };
  a.var_h1 = mu * mu * mu * mu * v;
  return a;
}

}  // namespace

std::vector<Kernel> builtin_catalog() {
  std::vector<Kernel> kernels;
  kernels.emplace_back(
      "mean", 1, [](std::span<const double> x) { return x[0]; },
      /*is_symmetric=*/true, /*moment_order=*/4.0, /*growth_degree=*/1.0,
      mean_analytic);
  kernels.emplace_back(
      "variance", 2,
      [](std::span<const double> x) {
        const double d = x[0] - x[1];
        return 0.5 * d * d;
      },
      true, 4.0, 2.0, variance_analytic);
  kernels.emplace_back(
      "gini", 2,
      [](std::span<const double> x) { return std::abs(x[0] - x[1]); }, true,
      4.0, 1.0, gini_analytic);
  kernels.emplace_back(
      "product", 2, [](std::span<const double> x) { return x[0] * x[1]; },
      true, 4.0, 1.0, product_analytic);
  kernels.emplace_back(
      "triple_product", 3,
      [](std::span<const double> x) {
        // multiply in sorted order so evaluation is exactly
        // permutation-invariant despite float non-associativity
        double a = x[0], b = x[1], c = x[2];
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        return a * b * c;
      },
      true, 4.0, 1.0, triple_product_analytic);
  return kernels;
}

Kernel catalog_kernel(const std::string& name) {
  for (auto& k : builtin_catalog()) {
    if (k.name() == name) return k;
  }
  throw std::invalid_argument("unknown kernel '" + name +
                              "'; see `ustatlab catalog`");
}

}  // namespace ustatlab
