#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ustatlab/kernels.hpp"
#include "ustatlab/processes.hpp"

namespace ustatlab {

// A Monte Carlo estimate with its standard error. se = 0 marks values that
// are exact with respect to the reference sample (full enumeration or a
// closed form).
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// The measure the Hoeffding projections integrate against: either a large
// oracle sample from the true marginal law, or the observed sample itself
// (plug-in / empirical measure).
struct ReferenceMeasure {
  enum class Mode { true_xi, plug_in };

  Mode mode = Mode::plug_in;
  std::vector<double> oracle_sample;   // sorted, nonempty
  std::optional<ProcessSpec> source;   // set in true_xi mode
  std::uint64_t seed = 0;              // base key for deterministic MC draws
  std::uint64_t mc_tuples = 100000;    // MC size past the enumeration cap
  std::uint64_t enumeration_cap = 20000000;
  bool use_closed_forms = true;        // allow analytic h1 in true_xi mode

  // Oracle of n_ref >= 10^4 marginal draws, independent of any experiment
  // sample (stream role `oracle`).
  static ReferenceMeasure true_xi(const ProcessSpec& spec, std::size_t n_ref,
                                  std::uint64_t seed);
  static ReferenceMeasure plug_in_of(std::span<const double> sample);
};

// h_k(x_1..x_k) = integral of h(x_1..x_m) over m-k reference coordinates.
// k = m returns kernel(args) exactly; k < m averages over all increasing
// index (m-k)-tuples of the oracle sample when C(N, m-k) fits the cap,
// otherwise over mc_tuples sampled tuples (deterministic in (seed, args)).
Estimate marginal_projection(const Kernel& kernel, int k,
                             std::span<const double> args,
                             const ReferenceMeasure& ref);

// Canonical (completely degenerate) kernel of order i via the alternating
// binomial sum over marginal projections. The constant term is taken as 0,
// which is what centring asserts; this also makes the weighted component
// sum reproduce U_h identically in plug-in mode.
Kernel canonical_kernel(const Kernel& kernel, int i,
                        const ReferenceMeasure& ref);

// Same evaluation with propagated Monte Carlo standard error.
Estimate canonical_eval(const Kernel& kernel, int i,
                        std::span<const double> args,
                        const ReferenceMeasure& ref);

// Closed-form h1 for this kernel under the reference, when the reference
// is a true-xi measure that allows closed forms; null otherwise.
std::function<double(double)> reference_h1(const Kernel& kernel,
                                           const ReferenceMeasure& ref);

struct DegeneracyOptions {
  std::size_t probe_size = 2000;   // points where each h_i is probed
  std::size_t fresh_tuples = 2000; // fresh marginal draws per projection
  std::uint64_t seed = 0x0dd5eedull;
};

// Smallest i with detectably nonzero Var(h_i), minus one; m when every
// component variance is indistinguishable from zero. Each probe evaluation
// uses fresh marginal draws so its error is independent across probes; the
// noise floor is subtracted before the 5-sigma comparison.
int degeneracy_order(const Kernel& kernel, const ReferenceMeasure& ref,
                     const DegeneracyOptions& options = {});

}  // namespace ustatlab
