#include "ustatlab/processes.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ustatlab/format.hpp"
#include "ustatlab/kernels.hpp"

namespace ustatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string BetaRate::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::exact_zero:
      os << "beta(n) = 0 (i.i.d.)";
      break;
    case Kind::geometric:
      os << "beta(n) = O(" << format_double(rho) << "^n)";
      break;
    case Kind::m_dependent:
      os << "beta(n) = 0 for n > " << cutoff;
      break;
    case Kind::declared_polynomial:
      os << "beta(n) = O(n^-" << format_double(r) << ") (declared)";
      break;
  }
  return os.str();
}

void ProcessSpec::validate() const {
  switch (family) {
    case ProcessFamily::iid_normal:
      if (!(sigma > 0.0)) throw std::invalid_argument("iid_normal: sigma must be > 0");
      break;
    case ProcessFamily::iid_uniform:
      if (!(hi > lo)) throw std::invalid_argument("iid_uniform: need b > a");
      break;
    case ProcessFamily::iid_pareto:
      if (!(alpha > 2.0))
        throw std::invalid_argument("iid_pareto: alpha must be > 2 for finite variance");
      if (!(x_min > 0.0)) throw std::invalid_argument("iid_pareto: x_min must be > 0");
      break;
    case ProcessFamily::ar1_gaussian:
      if (!(std::abs(phi) < 1.0))
        throw std::invalid_argument("ar1_gaussian: need |phi| < 1");
      if (!(sigma_eps > 0.0))
        throw std::invalid_argument("ar1_gaussian: sigma_eps must be > 0");
      break;
    case ProcessFamily::ma_gaussian:
      if (ma_coefficients.empty())
        throw std::invalid_argument("ma_q_gaussian: needs at least one coefficient");
      break;
  }
  if (declared_r_exponent && !(*declared_r_exponent > 0.0))
    throw std::invalid_argument("declared r exponent must be > 0");
}

bool ProcessSpec::is_iid() const {
  switch (family) {
    case ProcessFamily::iid_normal:
    case ProcessFamily::iid_uniform:
    case ProcessFamily::iid_pareto:
      return true;
    default:
      return false;
  }
}

BetaRate ProcessSpec::beta_rate() const {
  BetaRate rate;
  if (declared_r_exponent) {
    rate.kind = BetaRate::Kind::declared_polynomial;
    rate.r = *declared_r_exponent;
    return rate;
  }
  switch (family) {
    case ProcessFamily::ar1_gaussian:
      rate.kind = BetaRate::Kind::geometric;
      rate.rho = std::abs(phi);
      break;
    case ProcessFamily::ma_gaussian:
      rate.kind = BetaRate::Kind::m_dependent;
      rate.cutoff = static_cast<int>(ma_coefficients.size()) - 1;
      break;
    default:
      rate.kind = BetaRate::Kind::exact_zero;
      break;
  }
  return rate;
}

double ProcessSpec::r_exponent() const {
  if (declared_r_exponent) return *declared_r_exponent;
  return kInf;
}

MarginalKind ProcessSpec::marginal_kind() const {
  switch (family) {
    case ProcessFamily::iid_uniform:
      return MarginalKind::uniform;
    case ProcessFamily::iid_pareto:
      return MarginalKind::pareto;
    default:
      return MarginalKind::normal;
  }
}

double ProcessSpec::marginal_mean() const {
  switch (family) {
    case ProcessFamily::iid_normal:
      return mu;
    case ProcessFamily::iid_uniform:
      return 0.5 * (lo + hi);
    case ProcessFamily::iid_pareto:
      return alpha * x_min / (alpha - 1.0);
    case ProcessFamily::ar1_gaussian:
    case ProcessFamily::ma_gaussian:
      return 0.0;
  }
  return 0.0;
}

double ProcessSpec::marginal_variance() const {
  switch (family) {
    case ProcessFamily::iid_normal:
      return sigma * sigma;
    case ProcessFamily::iid_uniform: {
      const double w = hi - lo;
      return w * w / 12.0;
    }
    case ProcessFamily::iid_pareto: {
      return alpha * x_min * x_min / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0));
    }
    case ProcessFamily::ar1_gaussian:
      return sigma_eps * sigma_eps / (1.0 - phi * phi);
    case ProcessFamily::ma_gaussian: {
      double s = 0.0;
      for (double c : ma_coefficients) s += c * c;
      return s;
    }
  }
  return 0.0;
}

std::optional<double> ProcessSpec::marginal_central_fourth() const {
  switch (marginal_kind()) {
    case MarginalKind::normal: {
      const double v = marginal_variance();
      return 3.0 * v * v;
    }
    case MarginalKind::uniform: {
      const double w = hi - lo;
      return w * w * w * w / 80.0;
    }
    case MarginalKind::pareto:
      if (alpha > 4.0) {
        // E[(X - mean)^4] from raw moments m_k = alpha x_min^k / (alpha - k).
        const double m1 = alpha * x_min / (alpha - 1.0);
        const double m2 = alpha * x_min * x_min / (alpha - 2.0);
        const double m3 = alpha * std::pow(x_min, 3) / (alpha - 3.0);
        const double m4 = alpha * std::pow(x_min, 4) / (alpha - 4.0);
        return m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * std::pow(m1, 4);
      }
      return std::nullopt;
  }
  return std::nullopt;
}

double ProcessSpec::max_marginal_moment() const {
  return marginal_kind() == MarginalKind::pareto ? alpha : kInf;
}

double ProcessSpec::autocovariance(int lag) const {
  const int k = std::abs(lag);
  switch (family) {
    case ProcessFamily::ar1_gaussian:
      return marginal_variance() * std::pow(phi, k);
    case ProcessFamily::ma_gaussian: {
      const auto& c = ma_coefficients;
      const int q = static_cast<int>(c.size()) - 1;
      if (k > q) return 0.0;
      double s = 0.0;
      for (int j = 0; j + k <= q; ++j) s += c[j] * c[j + k];
      return s;
    }
    default:
      return k == 0 ? marginal_variance() : 0.0;
  }
}

double ProcessSpec::long_run_variance_of_sums() const {
  switch (family) {
    case ProcessFamily::ar1_gaussian:
      return marginal_variance() * (1.0 + phi) / (1.0 - phi);
    case ProcessFamily::ma_gaussian: {
      double s = 0.0;
      for (double c : ma_coefficients) s += c;
      return s * s;
    }
    default:
      return marginal_variance();
  }
}

std::string ProcessSpec::to_string() const {
  std::ostringstream os;
  switch (family) {
    case ProcessFamily::iid_normal:
      os << "iid_normal(" << format_double(mu) << "," << format_double(sigma) << ")";
      break;
    case ProcessFamily::iid_uniform:
      os << "iid_uniform(" << format_double(lo) << "," << format_double(hi) << ")";
      break;
    case ProcessFamily::iid_pareto:
      os << "iid_pareto(" << format_double(alpha) << "," << format_double(x_min) << ")";
      break;
    case ProcessFamily::ar1_gaussian:
      os << "ar1_gaussian(" << format_double(phi) << "," << format_double(sigma_eps) << ")";
      break;
    case ProcessFamily::ma_gaussian: {
      os << "ma_q_gaussian(";
      for (std::size_t j = 0; j < ma_coefficients.size(); ++j) {
        if (j) os << ",";
        os << format_double(ma_coefficients[j]);
      }
      os << ")";
      break;
    }
  }
  return os.str();
}

bool ProcessSpec::operator==(const ProcessSpec& other) const {
  if (family != other.family) return false;
  if (declared_r_exponent != other.declared_r_exponent) return false;
  switch (family) {
    case ProcessFamily::iid_normal:
      return mu == other.mu && sigma == other.sigma;
    case ProcessFamily::iid_uniform:
      return lo == other.lo && hi == other.hi;
    case ProcessFamily::iid_pareto:
      return alpha == other.alpha && x_min == other.x_min;
    case ProcessFamily::ar1_gaussian:
      return phi == other.phi && sigma_eps == other.sigma_eps;
    case ProcessFamily::ma_gaussian:
      return ma_coefficients == other.ma_coefficients;
  }
  return false;
}

ProcessSpec parse_process_spec(const std::string& text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("process spec must look like family(a,b,...): " + text);
  const std::string name = text.substr(0, open);
  std::vector<double> args;
  std::string body = text.substr(open + 1, close - open - 1);
  std::istringstream is(body);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    size_t pos = 0;
    double v;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad numeric parameter '" + tok + "' in " + text);
    }
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size())
      throw std::invalid_argument("bad numeric parameter '" + tok + "' in " + text);
    args.push_back(v);
  }

  ProcessSpec spec;
  auto need = [&](std::size_t k) {
    if (args.size() != k)
      throw std::invalid_argument(name + " expects " + std::to_string(k) + " parameters");
  };
  if (name == "iid_normal") {
    need(2);
    spec.family = ProcessFamily::iid_normal;
    spec.mu = args[0];
    spec.sigma = args[1];
  } else if (name == "iid_uniform") {
    need(2);
    spec.family = ProcessFamily::iid_uniform;
    spec.lo = args[0];
    spec.hi = args[1];
  } else if (name == "iid_pareto") {
    need(2);
    spec.family = ProcessFamily::iid_pareto;
    spec.alpha = args[0];
    spec.x_min = args[1];
  } else if (name == "ar1_gaussian") {
    need(2);
    spec.family = ProcessFamily::ar1_gaussian;
    spec.phi = args[0];
    spec.sigma_eps = args[1];
  } else if (name == "ma_q_gaussian") {
    if (args.empty())
      throw std::invalid_argument("ma_q_gaussian needs at least one coefficient");
    spec.family = ProcessFamily::ma_gaussian;
    spec.ma_coefficients = args;
  } else {
    throw std::invalid_argument("unknown process family: " + name);
  }
  spec.validate();
  return spec;
}

std::vector<double> sample_path(const ProcessSpec& spec, std::size_t n,
                                PhiloxStream& stream) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("sample_path: n must be >= 1");
  std::vector<double> x(n);
  switch (spec.family) {
    case ProcessFamily::iid_normal:
      for (auto& v : x) v = spec.mu + spec.sigma * stream.next_normal();
      break;
    case ProcessFamily::iid_uniform:
      for (auto& v : x) v = spec.lo + (spec.hi - spec.lo) * stream.next_double();
      break;
    case ProcessFamily::iid_pareto:
      for (auto& v : x)
        v = spec.x_min * std::pow(stream.next_double(), -1.0 / spec.alpha);
      break;
    case ProcessFamily::ar1_gaussian: {
      const double stationary_sd =
          spec.sigma_eps / std::sqrt(1.0 - spec.phi * spec.phi);
      double prev = stationary_sd * stream.next_normal();
      x[0] = prev;
      for (std::size_t t = 1; t < n; ++t) {
        prev = spec.phi * prev + spec.sigma_eps * stream.next_normal();
        x[t] = prev;
      }
      break;
    }
    case ProcessFamily::ma_gaussian: {
      const auto& c = spec.ma_coefficients;
      const std::size_t q = c.size() - 1;
      std::vector<double> eps(n + q);
      for (auto& e : eps) e = stream.next_normal();
      for (std::size_t t = 0; t < n; ++t) {
        double s = 0.0;
        for (std::size_t j = 0; j <= q; ++j) s += c[j] * eps[t + q - j];
        x[t] = s;
      }
      break;
    }
  }
  return x;
}

std::vector<double> marginal_sample(const ProcessSpec& spec, std::size_t n,
                                    PhiloxStream& stream) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("marginal_sample: n must be >= 1");
  if (spec.is_iid()) return sample_path(spec, n, stream);
  const double sd = std::sqrt(spec.marginal_variance());
  std::vector<double> x(n);
  for (auto& v : x) v = sd * stream.next_normal();
  return x;
}

Applicability theorem_applicability(const ProcessSpec& spec,
                                    const Kernel& kernel) {
  spec.validate();
  Applicability out;
  const double m = kernel.degree();
  const double claimed_p = kernel.moment_order();

  // Effective moment order of h(X_1,...,X_m) under this marginal. For
  // polynomially bounded kernels of growth degree d, E|h|^p needs
  // E|X|^{p d} < inf.
  const double marginal_sup = spec.max_marginal_moment();
  double p_eff = claimed_p;
  bool sup_exclusive = false;
  if (std::isfinite(marginal_sup)) {
    const double avail = marginal_sup / kernel.growth_degree();
    if (avail <= claimed_p) {
      p_eff = avail;
      sup_exclusive = true;  // E|X|^alpha itself diverges
    }
  }
  out.p_effective = p_eff;

  std::ostringstream os;
  if (spec.is_iid()) {
    out.threshold = std::numeric_limits<double>::quiet_NaN();
    out.applicable = sup_exclusive ? (p_eff > 2.0) : (p_eff >= 2.0);
    os << "i.i.d. case: needs L2 kernel; effective p = " << p_eff
       << (out.applicable ? " >= 2, applicable" : " < 2 (or boundary), not applicable");
  } else {
    const double r = spec.r_exponent();
    if (p_eff > 2.0) {
      out.threshold = m * p_eff / (p_eff - 2.0);
      out.applicable = r > out.threshold;
      os << "mixing case: threshold m*p/(p-2) = " << out.threshold
         << ", rate r = " << (std::isinf(r) ? "inf" : std::to_string(r)) << " ("
         << spec.beta_rate().describe() << "), "
         << (out.applicable ? "applicable" : "not applicable");
    } else {
      out.threshold = std::numeric_limits<double>::quiet_NaN();
      out.applicable = false;
      os << "mixing case: needs p > 2, effective p = " << p_eff
         << ", not applicable";
    }
  }
  out.binding = os.str();
  return out;
}

std::optional<double> long_run_variance_analytic(const ProcessSpec& spec,
                                                 const Kernel& kernel) {
  const auto analytic = kernel.analytic_for(spec);
  if (!analytic) return std::nullopt;
  const double m = kernel.degree();
  if (analytic->h1_is_identity) {
    return m * m * spec.long_run_variance_of_sums();
  }
  if (spec.is_iid() && analytic->var_h1) {
    return m * m * *analytic->var_h1;
  }
  return std::nullopt;
}

}  // namespace ustatlab
