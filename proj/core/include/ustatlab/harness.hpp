#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ustatlab/diagnostics.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/processes.hpp"
#include "ustatlab/wasserstein.hpp"

namespace ustatlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One experiment: kernel x process x n-grid x replication budget, plus the
// knobs that decide estimator selection and sigma sourcing. Everything the
// computation depends on enters the config hash; outputs are a pure
// function of (config, seed).
struct ExperimentConfig {
  std::string kernel = "mean";
  std::optional<double> kernel_moment_order;  // override of the catalog claim
  std::string process = "iid_normal(0,1)";
  std::vector<long> n_grid = {50, 200, 800};
  int reps = 2000;
  std::uint64_t seed = 1;
  std::string projection_mode = "true_xi";  // projections for diagnostics
  std::uint64_t enumeration_cap = 20000000;
  std::uint64_t incomplete_subsets = 100000;
  std::string sigma = "analytic";  // "analytic" | "estimated"
  std::string format = "csv";      // "csv" | "json"
  std::string out = ".";
  std::vector<int> orders;                  // rate experiments
  std::optional<double> r_exponent;         // declared mixing rate override
  std::size_t n_ref = 100000;
  std::uint64_t mc_tuples = 100000;
  std::size_t center_mc_size = 100000;
  std::size_t probe_size = 2000;
  std::size_t fresh_tuples = 2000;
  std::size_t sigma_path_length = 100000;
  bool record_timing = false;  // measured wall_ms breaks byte-stability
  unsigned threads = 0;

  void set(const std::string& key, const std::string& value_text);
  void validate() const;
  ProcessSpec process_spec() const;
  std::string canonical_string() const;
  std::string hash() const;

  bool operator==(const ExperimentConfig&) const = default;
};

// `key = value` lines, values JSON-compatible; full-line # comments.
ExperimentConfig parse_config_file(const std::string& path);

struct ExperimentRow {
  long n = 0;
  int reps = 0;
  double d2_full = 0.0;
  double d2_linear = 0.0;
  double rms_remainder = 0.0;
  double mean_square = 0.0;
  double mean_square_se = 0.0;
  double sigma_sq_used = 0.0;
  std::string sigma_source;
  bool applicable = false;
  int degeneracy_order = 0;
  bool exact_estimator = true;
  double wall_ms = 0.0;

  bool operator==(const ExperimentRow&) const = default;
};

struct ExperimentResult {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string kernel;
  std::string process;
  std::vector<ExperimentRow> rows;
  std::vector<UIPoint> ui_profile;
  bool degenerate = false;
  std::string applicability_binding;
  std::optional<double> sigma_analytic;
  std::optional<double> sigma_estimated;
  bool sigma_mismatch = false;
  ExperimentConfig config;

  bool operator==(const ExperimentResult&) const;
};

bool operator==(const UIPoint& a, const UIPoint& b);

// Result plus the replication laws (law of sqrt(n) U_h and of the linear
// part m sqrt(n) U^(1), per n) for downstream diagnostics.
struct ConvergenceOutputs {
  ExperimentResult result;
  std::vector<std::pair<long, EmpiricalDistribution>> full_laws;
  std::vector<std::pair<long, EmpiricalDistribution>> linear_laws;
};

ConvergenceOutputs run_convergence_experiment_full(const ExperimentConfig&);
ExperimentResult run_convergence_experiment(const ExperimentConfig&);

struct RateReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  RateFit fit;
};

RateReport run_rate_experiment(const ExperimentConfig&);

struct DiagnoseReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<UIPoint> ui;
  bool lindeberg_available = false;
  double epsilon = 0.1;
  std::vector<LindebergPoint> lindeberg;
};

DiagnoseReport run_diagnose(const ExperimentConfig&, double epsilon = 0.1);

// Serialization. CSV header (fixed):
// config_hash,seed,n,R,d2_full,d2_linear,rms_remainder,mean_square,
// sigma_sq_used,sigma_source,applicable,degeneracy_order,wall_ms
std::string to_csv(const ExperimentResult&);
std::string to_json_string(const ExperimentResult&);
ExperimentResult result_from_json_string(const std::string&);

std::string to_csv(const RateReport&);
std::string to_json_string(const RateReport&);
std::string to_csv(const DiagnoseReport&);
std::string to_json_string(const DiagnoseReport&);

// Writes <prefix>_<hash>.<format> under out_dir; returns the path.
std::string emit_report(const ExperimentResult&, const std::string& format,
                        const std::string& out_dir);
std::string emit_report(const RateReport&, const std::string& format,
                        const std::string& out_dir);
std::string emit_report(const DiagnoseReport&, const std::string& format,
                        const std::string& out_dir);

}  // namespace ustatlab
