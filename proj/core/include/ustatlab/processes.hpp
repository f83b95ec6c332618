#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ustatlab/rng.hpp"

namespace ustatlab {

class Kernel;

enum class ProcessFamily {
  iid_normal,
  iid_uniform,
  iid_pareto,
  ar1_gaussian,
  ma_gaussian,
};

enum class MarginalKind { normal, uniform, pareto };

// Mixing-rate descriptor. Rates are certified per family, never estimated:
// i.i.d. sequences have beta identically zero, MA(q) is q-dependent
// (beta(n) = 0 for n > q), Gaussian AR(1) mixes geometrically.
struct BetaRate {
  enum class Kind { exact_zero, geometric, m_dependent, declared_polynomial };
  Kind kind = Kind::exact_zero;
  double rho = 0.0;   // geometric decay coefficient
  int cutoff = 0;     // m_dependent: beta(n) = 0 for n > cutoff
  double r = 0.0;     // declared_polynomial: beta(n) = O(n^-r)
  std::string describe() const;
};

// A stationary scalar data-generating mechanism with analytically certified
// mixing rate, marginal moments and autocovariance.
struct ProcessSpec {
  ProcessFamily family = ProcessFamily::iid_normal;

  double mu = 0.0, sigma = 1.0;        // iid_normal
  double lo = 0.0, hi = 1.0;           // iid_uniform
  double alpha = 3.0, x_min = 1.0;     // iid_pareto
  double phi = 0.5, sigma_eps = 1.0;   // ar1_gaussian
  std::vector<double> ma_coefficients; // ma_gaussian, innovations N(0,1)

  // Optional declared polynomial mixing rate, used for hypothetical-rate
  // applicability checks (negative controls). When set it replaces the
  // certified r exponent.
  std::optional<double> declared_r_exponent;

  void validate() const;  // throws std::invalid_argument

  bool is_iid() const;
  BetaRate beta_rate() const;
  double r_exponent() const;  // +inf unless declared polynomial

  MarginalKind marginal_kind() const;
  double marginal_mean() const;
  double marginal_variance() const;
  // Central fourth moment of the marginal, when closed-form (absent for
  // Pareto with alpha <= 4).
  std::optional<double> marginal_central_fourth() const;
  // Supremum of s with E|X|^s < inf; +inf except Pareto (alpha, exclusive).
  double max_marginal_moment() const;

  double autocovariance(int lag) const;
  // gamma_0 + 2 sum_{k>=1} gamma_k in closed form.
  double long_run_variance_of_sums() const;

  std::string to_string() const;
  bool operator==(const ProcessSpec& other) const;
};

// Parses strings like "iid_normal(0,1)", "ar1_gaussian(0.5,1)",
// "ma_q_gaussian(1,0.4,0.2)", "iid_pareto(2.5,1)", "iid_uniform(0,1)".
ProcessSpec parse_process_spec(const std::string& text);

// Length-n path started from the stationary law; bitwise-deterministic
// given the stream key.
std::vector<double> sample_path(const ProcessSpec& spec, std::size_t n,
                                PhiloxStream& stream);

// i.i.d. draws from the stationary marginal (the law of X_1).
std::vector<double> marginal_sample(const ProcessSpec& spec, std::size_t n,
                                    PhiloxStream& stream);

struct Applicability {
  bool applicable = false;
  // m*p/(p-2) evaluated at the effective moment order (NaN when the
  // threshold never enters, e.g. the i.i.d. case).
  double threshold = 0.0;
  double p_effective = 0.0;
  std::string binding;
};

// Checks the limit theorem's assumptions: i.i.d. data with L2 kernels, or
// stationary absolutely regular data with L_p kernels (p > 2) and
// beta(n) = O(n^-r) for r > m*p/(p-2). Moment availability is reduced
// through the kernel's polynomial growth degree for heavy-tailed marginals.
Applicability theorem_applicability(const ProcessSpec& spec,
                                    const Kernel& kernel);

// m^2 * (gamma_0 + 2 sum gamma_k) of h1(X_k) where closed forms are
// registered: linear h1 on Gaussian AR(1)/MA/i.i.d., or any h1 with known
// variance on i.i.d. data. Absent otherwise.
std::optional<double> long_run_variance_analytic(const ProcessSpec& spec,
                                                 const Kernel& kernel);

}  // namespace ustatlab
