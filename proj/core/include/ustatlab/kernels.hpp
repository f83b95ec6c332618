#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustatlab/processes.hpp"

namespace ustatlab {

// Closed-form facts about a kernel under a specific reference marginal.
// h1 is the first Hoeffding projection of the *centred* kernel.
struct KernelAnalytic {
  std::optional<double> theta_raw;        // E h_raw(X_1,...,X_m)
  std::function<double(double)> h1;       // null when no closed form
  std::optional<double> var_h1;
  bool h1_is_identity = false;  // h1(x) = x - mean(X); enables the
                                // autocovariance-series long-run variance
};

// A symmetric degree-m real kernel. Evaluation applies the centring offset:
// operator() returns raw(args) - centering_offset(). Immutable after
// construction; evaluation is re-entrant and free of hidden state.
class Kernel {
 public:
  using Eval = std::function<double(std::span<const double>)>;
  using AnalyticProvider =
      std::function<std::optional<KernelAnalytic>(const ProcessSpec&)>;

  Kernel(std::string name, int degree, Eval raw_eval, bool is_symmetric,
         double moment_order = 4.0, double growth_degree = 1.0,
         AnalyticProvider analytic = nullptr);

  double operator()(std::span<const double> args) const;
  double raw(std::span<const double> args) const;

  const std::string& name() const { return name_; }
  int degree() const { return degree_; }
  bool is_symmetric() const { return is_symmetric_; }
  double centering_offset() const { return centering_offset_; }
  double moment_order() const { return moment_order_; }
  // Max per-argument polynomial power d with |h| <= C(1 + sum |x_i|^d);
  // bounds which L_p norms survive heavy-tailed marginals.
  double growth_degree() const { return growth_degree_; }

  // Analytic metadata valid under the given reference process, when known.
  std::optional<KernelAnalytic> analytic_for(const ProcessSpec& ref) const;

  Kernel with_offset(double offset) const;
  Kernel with_moment_order(double p) const;

 private:
  std::string name_;
  int degree_;
  Eval raw_;
  bool is_symmetric_;
  double centering_offset_ = 0.0;
  double moment_order_;
  double growth_degree_;
  AnalyticProvider analytic_;
};

// Averages raw_kernel over all m! argument orders. Degrees above 8 are
// rejected (40320 evaluations per call is the practical ceiling).
Kernel symmetrize(const std::string& name, int degree,
                  const Kernel::Eval& raw_kernel);

struct CenterResult {
  Kernel kernel;
  double offset = 0.0;
  double mc_se = 0.0;     // 0 when the offset came from analytic metadata
  bool from_analytic = false;
};

// Sets the centring offset to the analytic mean when the kernel's metadata
// covers `reference`, otherwise to a Monte Carlo estimate over mc_size
// independent m-tuples from the marginal. Non-finite kernel values abort
// with the offending tuple in the message.
CenterResult center_detail(const Kernel& kernel, const ProcessSpec& reference,
                           std::size_t mc_size, std::uint64_t seed = 0x5eedc0deull);
Kernel center(const Kernel& kernel, const ProcessSpec& reference,
              std::size_t mc_size, std::uint64_t seed = 0x5eedc0deull);

// Built-in kernels: mean (m=1), variance (m=2), gini (m=2), product
// (m=2, degenerate for centred marginals), triple_product (m=3). Each
// carries analytic metadata where closed forms exist.
std::vector<Kernel> builtin_catalog();

// Catalog lookup by name; throws std::invalid_argument for unknown names.
Kernel catalog_kernel(const std::string& name);

}  // namespace ustatlab
