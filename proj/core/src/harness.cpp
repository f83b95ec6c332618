#include "ustatlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "ustatlab/accum.hpp"
#include "ustatlab/combinatorics.hpp"
#include "ustatlab/format.hpp"
#include "ustatlab/parallel.hpp"
#include "ustatlab/projections.hpp"
#include "ustatlab/rng.hpp"
#include "ustatlab/ustat.hpp"

namespace ustatlab {

using nlohmann::json;

namespace {

long to_long(const json& v, const std::string& key) {
  if (!v.is_number())
    throw ConfigError("config key '" + key + "' expects a number");
  return v.get<long>();
}

std::vector<long> to_long_list(const json& v, const std::string& key) {
  std::vector<long> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(to_long(e, key));
  } else {
    out.push_back(to_long(v, key));
  }
  return out;
}

std::string to_str(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

void ExperimentConfig::set(const std::string& key,
                           const std::string& value_text) {
  json v = json::parse(value_text, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) v = value_text;  // bare string

  if (key == "kernel") {
    kernel = to_str(v);
  } else if (key == "kernel_moment_order") {
    kernel_moment_order = v.get<double>();
  } else if (key == "process") {
    process = to_str(v);
  } else if (key == "n_grid") {
    n_grid = to_long_list(v, key);
  } else if (key == "reps") {
    reps = static_cast<int>(to_long(v, key));
  } else if (key == "seed") {
    if (!v.is_number()) throw ConfigError("seed expects a number");
    seed = v.get<std::uint64_t>();
  } else if (key == "projection_mode") {
    projection_mode = to_str(v);
  } else if (key == "enumeration_cap") {
    enumeration_cap = static_cast<std::uint64_t>(to_long(v, key));
  } else if (key == "incomplete_subsets") {
    incomplete_subsets = static_cast<std::uint64_t>(to_long(v, key));
  } else if (key == "sigma") {
    sigma = to_str(v);
  } else if (key == "format") {
    format = to_str(v);
  } else if (key == "out") {
    out = to_str(v);
  } else if (key == "orders") {
    orders.clear();
    for (long o : to_long_list(v, key)) orders.push_back(static_cast<int>(o));
  } else if (key == "r_exponent") {
    r_exponent = v.get<double>();
  } else if (key == "n_ref") {
    n_ref = static_cast<std::size_t>(to_long(v, key));
  } else if (key == "mc_tuples") {
    mc_tuples = static_cast<std::uint64_t>(to_long(v, key));
  } else if (key == "center_mc_size") {
    center_mc_size = static_cast<std::size_t>(to_long(v, key));
  } else if (key == "probe_size") {
    probe_size = static_cast<std::size_t>(to_long(v, key));
  } else if (key == "fresh_tuples") {
    fresh_tuples = static_cast<std::size_t>(to_long(v, key));
  } else if (key == "sigma_path_length") {
    sigma_path_length = static_cast<std::size_t>(to_long(v, key));
  } else if (key == "record_timing") {
    if (!v.is_boolean()) throw ConfigError("record_timing expects true/false");
    record_timing = v.get<bool>();
  } else if (key == "threads") {
    threads = static_cast<unsigned>(to_long(v, key));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  if (reps < 100) throw ConfigError("reps must be >= 100");
  if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ConfigError("n_grid entries must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw ConfigError("n_grid must be strictly ascending");
  }
  if (projection_mode != "true_xi" && projection_mode != "plug_in")
    throw ConfigError("projection_mode must be true_xi or plug_in");
  if (sigma != "analytic" && sigma != "estimated")
    throw ConfigError("sigma must be analytic or estimated");
  if (format != "csv" && format != "json")
    throw ConfigError("format must be csv or json");
  if (incomplete_subsets < 100)
    throw ConfigError("incomplete_subsets must be >= 100");
  if (n_ref < 10000) throw ConfigError("n_ref must be >= 10^4");
  if (center_mc_size < 10000) throw ConfigError("center_mc_size must be >= 10^4");
  if (probe_size < 1000) throw ConfigError("probe_size must be >= 10^3");
  if (sigma_path_length < 200)
    throw ConfigError("sigma_path_length must be >= 200");
  try {
    process_spec();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ProcessSpec ExperimentConfig::process_spec() const {
  ProcessSpec spec = parse_process_spec(process);
  if (r_exponent) {
    spec.declared_r_exponent = *r_exponent;
    spec.validate();
  }
  return spec;
}

std::string ExperimentConfig::canonical_string() const {
  std::ostringstream os;
  os << "kernel=" << kernel << ";";
  if (kernel_moment_order)
    os << "kernel_moment_order=" << format_double(*kernel_moment_order) << ";";
  os << "process=" << process << ";n_grid=";
  for (long n : n_grid) os << n << ",";
  os << ";reps=" << reps << ";seed=" << seed
     << ";projection_mode=" << projection_mode
     << ";enumeration_cap=" << enumeration_cap
     << ";incomplete_subsets=" << incomplete_subsets << ";sigma=" << sigma
     << ";orders=";
  for (int o : orders) os << o << ",";
  os << ";";
  if (r_exponent) os << "r_exponent=" << format_double(*r_exponent) << ";";
  os << "n_ref=" << n_ref << ";mc_tuples=" << mc_tuples
     << ";center_mc_size=" << center_mc_size << ";probe_size=" << probe_size
     << ";fresh_tuples=" << fresh_tuples
     << ";sigma_path_length=" << sigma_path_length;
  return os.str();
}

std::string ExperimentConfig::hash() const {
  const std::string canon = canonical_string();
  const std::uint64_t h = fnv1a64(canon.data(), canon.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = line;
    const auto first = trimmed.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    trimmed = trimmed.substr(first);
    if (trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key = value");
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = strip(trimmed.substr(0, eq));
    const std::string value = strip(trimmed.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": empty key or value");
    try {
      config.set(key, value);
    } catch (const json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

namespace {

struct Context {
  ExperimentConfig cfg;
  ProcessSpec spec;
  std::unique_ptr<Kernel> centred;
  CenterResult center_info{Kernel("zero", 1,
                                  [](std::span<const double>) { return 0.0; },
                                  true)};
  Applicability applicability;
  int degeneracy = 0;
  std::optional<double> sigma_analytic;
  std::optional<double> sigma_estimated;
  double sigma_sq_used = 0.0;
  std::string sigma_source_used;
  std::function<double(double)> h1;
  bool h1_closed = false;
  std::shared_ptr<const ReferenceMeasure> ref;
};

Context build_context(const ExperimentConfig& cfg) {
  cfg.validate();
  Context ctx;
  ctx.cfg = cfg;
  ctx.spec = cfg.process_spec();

  Kernel kernel = catalog_kernel(cfg.kernel);
  if (cfg.kernel_moment_order)
    kernel = kernel.with_moment_order(*cfg.kernel_moment_order);
  if (cfg.n_grid.front() < kernel.degree())
    throw ConfigError("n_grid minimum is below the kernel degree");

  ctx.center_info =
      center_detail(kernel, ctx.spec, cfg.center_mc_size, cfg.seed ^ 0xC0FFEEull);
  ctx.centred = std::make_unique<Kernel>(ctx.center_info.kernel);

  ctx.applicability = theorem_applicability(ctx.spec, *ctx.centred);

  auto ref = ReferenceMeasure::true_xi(ctx.spec, cfg.n_ref, cfg.seed);
  ref.mc_tuples = cfg.mc_tuples;
  ref.enumeration_cap = cfg.enumeration_cap;
  ctx.ref = std::make_shared<const ReferenceMeasure>(std::move(ref));

  if (const auto analytic = ctx.centred->analytic_for(ctx.spec);
      analytic && analytic->h1) {
    ctx.h1 = analytic->h1;
    ctx.h1_closed = true;
  } else {
    const Kernel h1_kernel = canonical_kernel(*ctx.centred, 1, *ctx.ref);
    ctx.h1 = [h1_kernel](double x) {
      const double arg[1] = {x};
      return h1_kernel(std::span<const double>(arg, 1));
    };
  }

  DegeneracyOptions deg;
  deg.probe_size = cfg.probe_size;
  deg.fresh_tuples = cfg.fresh_tuples;
  deg.seed = cfg.seed ^ 0xDE6Eull;
  ctx.degeneracy = degeneracy_order(*ctx.centred, *ctx.ref, deg);

  ctx.sigma_analytic = long_run_variance_analytic(ctx.spec, *ctx.centred);

  const bool need_estimate = cfg.sigma == "estimated" || !ctx.sigma_analytic;
  if (need_estimate || ctx.h1_closed) {
    PhiloxStream stream(cfg.seed, 0, StreamRole::sigma);
    const auto path = sample_path(ctx.spec, cfg.sigma_path_length, stream);
    std::vector<double> h1_values(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) h1_values[i] = ctx.h1(path[i]);
    const double m = ctx.centred->degree();
    ctx.sigma_estimated =
        m * m * long_run_variance_estimate(h1_values).value;
  }

  if (cfg.sigma == "analytic" && ctx.sigma_analytic) {
    ctx.sigma_sq_used = *ctx.sigma_analytic;
    ctx.sigma_source_used = "analytic";
  } else {
    ctx.sigma_sq_used = std::max(0.0, *ctx.sigma_estimated);
    ctx.sigma_source_used = "estimated";
  }
  return ctx;
}

// Distance of the replication law to its limit: N(0, sigma) when sigma^2
// is positive, the point mass at 0 in the degenerate case.
double distance_to_limit(const EmpiricalDistribution& dist, double sigma_sq) {
  if (sigma_sq > 1e-12) return w2_empirical_gaussian(dist, std::sqrt(sigma_sq));
  return std::sqrt(dist.second_moment());
}

}  // namespace

bool operator==(const UIPoint& a, const UIPoint& b) {
  return a.threshold == b.threshold &&
         a.sup_tail_second_moment == b.sup_tail_second_moment;
}

bool ExperimentResult::operator==(const ExperimentResult& other) const {
  return config_hash == other.config_hash && seed == other.seed &&
         kernel == other.kernel && process == other.process &&
         rows == other.rows && ui_profile == other.ui_profile &&
         degenerate == other.degenerate &&
         applicability_binding == other.applicability_binding &&
         sigma_analytic == other.sigma_analytic &&
         sigma_estimated == other.sigma_estimated &&
         sigma_mismatch == other.sigma_mismatch && config == other.config;
}

ConvergenceOutputs run_convergence_experiment_full(
    const ExperimentConfig& cfg) {
  Context ctx = build_context(cfg);
  const Kernel& kernel = *ctx.centred;
  const int m = kernel.degree();
  const int reps = cfg.reps;

  ConvergenceOutputs out;
  ExperimentResult& result = out.result;
  result.config_hash = cfg.hash();
  result.seed = cfg.seed;
  result.kernel = cfg.kernel;
  result.process = cfg.process;
  result.config = cfg;
  result.degenerate = ctx.degeneracy >= 1;
  result.applicability_binding = ctx.applicability.binding;
  result.sigma_analytic = ctx.sigma_analytic;
  result.sigma_estimated = ctx.sigma_estimated;
  if (ctx.sigma_analytic && ctx.sigma_estimated) {
    const double a = *ctx.sigma_analytic;
    const double e = *ctx.sigma_estimated;
    result.sigma_mismatch = std::abs(a - e) > 0.15 * std::max(1e-12, a);
  }

  UStatOptions ustat_opts;
  ustat_opts.enumeration_cap = cfg.enumeration_cap;

  for (std::size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
    const long n = cfg.n_grid[gi];
    const bool exact =
        binomial_or_max(static_cast<std::uint64_t>(n), m) <= cfg.enumeration_cap;
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    std::vector<double> full_stats(reps), linear_stats(reps);
    const auto t0 = std::chrono::steady_clock::now();
    parallel_for_index(
        reps,
        [&](std::size_t r) {
          const std::uint32_t rep_id =
              static_cast<std::uint32_t>(gi * static_cast<std::size_t>(reps) + r);
          PhiloxStream path_stream(cfg.seed, rep_id, StreamRole::path);
          const auto path =
              sample_path(ctx.spec, static_cast<std::size_t>(n), path_stream);

          double u;
          if (exact) {
            u = u_statistic_exact(kernel, path, ustat_opts);
          } else {
            PhiloxStream subset_stream(cfg.seed, rep_id, StreamRole::subsets);
            u = u_statistic_incomplete(kernel, path, cfg.incomplete_subsets,
                                       subset_stream)
                    .estimate;
          }

          double u1;
          if (m == 1) {
            u1 = u;
          } else {
            CompensatedSum s;
            for (double x : path) s.add(ctx.h1(x));
            u1 = s.value() / static_cast<double>(path.size());
          }

          full_stats[r] = sqrt_n * u;
          linear_stats[r] = static_cast<double>(m) * sqrt_n * u1;
        },
        cfg.threads);
    const auto t1 = std::chrono::steady_clock::now();

    std::vector<double> remainder(reps), squares(reps);
    for (int r = 0; r < reps; ++r) {
      remainder[r] = full_stats[r] - linear_stats[r];
      squares[r] = full_stats[r] * full_stats[r];
    }
    EmpiricalDistribution full_law(full_stats);
    EmpiricalDistribution linear_law(linear_stats);
    const MeanVar sq = mean_and_variance(squares);

    ExperimentRow row;
    row.n = n;
    row.reps = reps;
    row.d2_full = distance_to_limit(full_law, ctx.sigma_sq_used);
    row.d2_linear = distance_to_limit(linear_law, ctx.sigma_sq_used);
    row.rms_remainder = root_mean_square(remainder);
    row.mean_square = sq.mean;
    row.mean_square_se = sq.se_of_mean();
    row.sigma_sq_used = ctx.sigma_sq_used;
    row.sigma_source = ctx.sigma_source_used;
    row.applicable = ctx.applicability.applicable;
    row.degeneracy_order = ctx.degeneracy;
    row.exact_estimator = exact;
    row.wall_ms =
        cfg.record_timing
            ? std::chrono::duration<double, std::milli>(t1 - t0).count()
            : 0.0;
    result.rows.push_back(row);

    out.full_laws.emplace_back(n, std::move(full_law));
    out.linear_laws.emplace_back(n, std::move(linear_law));
  }

  const double scale = std::sqrt(std::max(ctx.sigma_sq_used, 1e-12));
  const std::vector<double> thresholds = {0.0,         0.5 * scale, scale,
                                          1.5 * scale, 2.0 * scale, 3.0 * scale};
  result.ui_profile = uniform_integrability_profile(out.full_laws, thresholds);
  return out;
}

ExperimentResult run_convergence_experiment(const ExperimentConfig& cfg) {
  return run_convergence_experiment_full(cfg).result;
}

RateReport run_rate_experiment(const ExperimentConfig& cfg) {
  if (cfg.orders.empty()) throw ConfigError("nothing to fit: empty orders");
  Context ctx = build_context(cfg);

  RateOptions options;
  options.replications = cfg.reps;
  options.seed = cfg.seed;
  options.ustat.enumeration_cap = cfg.enumeration_cap;
  options.threads = cfg.threads;

  RateReport report;
  report.config_hash = cfg.hash();
  report.seed = cfg.seed;
  report.fit = rate_regression(*ctx.centred, ctx.spec, cfg.orders, cfg.n_grid,
                               *ctx.ref, options);
  return report;
}

DiagnoseReport run_diagnose(const ExperimentConfig& cfg, double epsilon) {
  ConvergenceOutputs outputs = run_convergence_experiment_full(cfg);
  Context ctx = build_context(cfg);  // cheap relative to the replications

  DiagnoseReport report;
  report.config_hash = cfg.hash();
  report.seed = cfg.seed;
  report.ui = outputs.result.ui_profile;
  report.epsilon = epsilon;

  if (ctx.spec.is_iid() && ctx.h1_closed) {
    PhiloxStream stream(cfg.seed, 1, StreamRole::probe);
    const auto pool =
        marginal_sample(ctx.spec, std::max<std::size_t>(cfg.sigma_path_length,
                                                        std::size_t{100000}),
                        stream);
    std::vector<double> h1_values(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
      h1_values[i] = ctx.h1(pool[i]);
    report.lindeberg =
        lindeberg_ratio(ctx.spec, h1_values, cfg.n_grid, epsilon);
    report.lindeberg_available = true;
  }
  return report;
}

namespace {

constexpr const char* kCsvHeader =
    "config_hash,seed,n,R,d2_full,d2_linear,rms_remainder,mean_square,"
    "sigma_sq_used,sigma_source,applicable,degeneracy_order,wall_ms";

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["kernel"] = cfg.kernel;
  if (cfg.kernel_moment_order) j["kernel_moment_order"] = *cfg.kernel_moment_order;
  j["process"] = cfg.process;
  j["n_grid"] = cfg.n_grid;
  j["reps"] = cfg.reps;
  j["seed"] = cfg.seed;
  j["projection_mode"] = cfg.projection_mode;
  j["enumeration_cap"] = cfg.enumeration_cap;
  j["incomplete_subsets"] = cfg.incomplete_subsets;
  j["sigma"] = cfg.sigma;
  j["format"] = cfg.format;
  j["out"] = cfg.out;
  j["orders"] = cfg.orders;
  if (cfg.r_exponent) j["r_exponent"] = *cfg.r_exponent;
  j["n_ref"] = cfg.n_ref;
  j["mc_tuples"] = cfg.mc_tuples;
  j["center_mc_size"] = cfg.center_mc_size;
  j["probe_size"] = cfg.probe_size;
  j["fresh_tuples"] = cfg.fresh_tuples;
  j["sigma_path_length"] = cfg.sigma_path_length;
  j["record_timing"] = cfg.record_timing;
  j["threads"] = cfg.threads;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.kernel = j.at("kernel").get<std::string>();
  if (j.contains("kernel_moment_order"))
    cfg.kernel_moment_order = j.at("kernel_moment_order").get<double>();
  cfg.process = j.at("process").get<std::string>();
  cfg.n_grid = j.at("n_grid").get<std::vector<long>>();
  cfg.reps = j.at("reps").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.projection_mode = j.at("projection_mode").get<std::string>();
  cfg.enumeration_cap = j.at("enumeration_cap").get<std::uint64_t>();
  cfg.incomplete_subsets = j.at("incomplete_subsets").get<std::uint64_t>();
  cfg.sigma = j.at("sigma").get<std::string>();
  cfg.format = j.at("format").get<std::string>();
  cfg.out = j.at("out").get<std::string>();
  cfg.orders = j.at("orders").get<std::vector<int>>();
  if (j.contains("r_exponent")) cfg.r_exponent = j.at("r_exponent").get<double>();
  cfg.n_ref = j.at("n_ref").get<std::size_t>();
  cfg.mc_tuples = j.at("mc_tuples").get<std::uint64_t>();
  cfg.center_mc_size = j.at("center_mc_size").get<std::size_t>();
  cfg.probe_size = j.at("probe_size").get<std::size_t>();
  cfg.fresh_tuples = j.at("fresh_tuples").get<std::size_t>();
  cfg.sigma_path_length = j.at("sigma_path_length").get<std::size_t>();
  cfg.record_timing = j.at("record_timing").get<bool>();
  cfg.threads = j.at("threads").get<unsigned>();
  return cfg;
}

json row_to_json(const ExperimentRow& row) {
  json j;
  j["n"] = row.n;
  j["R"] = row.reps;
  j["d2_full"] = row.d2_full;
  j["d2_linear"] = row.d2_linear;
  j["rms_remainder"] = row.rms_remainder;
  j["mean_square"] = row.mean_square;
  j["mean_square_se"] = row.mean_square_se;
  j["sigma_sq_used"] = row.sigma_sq_used;
  j["sigma_source"] = row.sigma_source;
  j["applicable"] = row.applicable;
  j["degeneracy_order"] = row.degeneracy_order;
  j["estimator"] = row.exact_estimator ? "exact" : "incomplete";
  j["wall_ms"] = row.wall_ms;
  return j;
}

ExperimentRow row_from_json(const json& j) {
  ExperimentRow row;
  row.n = j.at("n").get<long>();
  row.reps = j.at("R").get<int>();
  row.d2_full = j.at("d2_full").get<double>();
  row.d2_linear = j.at("d2_linear").get<double>();
  row.rms_remainder = j.at("rms_remainder").get<double>();
  row.mean_square = j.at("mean_square").get<double>();
  row.mean_square_se = j.at("mean_square_se").get<double>();
  row.sigma_sq_used = j.at("sigma_sq_used").get<double>();
  row.sigma_source = j.at("sigma_source").get<std::string>();
  row.applicable = j.at("applicable").get<bool>();
  row.degeneracy_order = j.at("degeneracy_order").get<int>();
  row.exact_estimator = j.at("estimator").get<std::string>() == "exact";
  row.wall_ms = j.at("wall_ms").get<double>();
  return row;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

std::string output_path(const std::string& out_dir, const std::string& prefix,
                        const std::string& hash, const std::string& format) {
  if (format != "csv" && format != "json")
    throw ConfigError("format must be csv or json");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / (prefix + "_" + hash + "." + format)).string();
}

}  // namespace

std::string to_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const ExperimentRow& row : result.rows) {
    os << result.config_hash << "," << result.seed << "," << row.n << ","
       << row.reps << "," << format_double(row.d2_full) << ","
       << format_double(row.d2_linear) << ","
       << format_double(row.rms_remainder) << ","
       << format_double(row.mean_square) << ","
       << format_double(row.sigma_sq_used) << "," << row.sigma_source << ","
       << (row.applicable ? "true" : "false") << "," << row.degeneracy_order
       << "," << format_double(row.wall_ms) << "\n";
  }
  return os.str();
}

std::string to_json_string(const ExperimentResult& result) {
  json j;
  j["config"] = config_to_json(result.config);
  j["config_hash"] = result.config_hash;
  j["seed"] = result.seed;
  j["kernel"] = result.kernel;
  j["process"] = result.process;
  j["rows"] = json::array();
  for (const auto& row : result.rows) j["rows"].push_back(row_to_json(row));
  j["ui_profile"] = json::array();
  for (const auto& p : result.ui_profile) {
    j["ui_profile"].push_back(
        {{"threshold", p.threshold},
         {"sup_tail_second_moment", p.sup_tail_second_moment}});
  }
  j["degenerate"] = result.degenerate;
  j["applicability"] = result.applicability_binding;
  j["sigma_analytic"] =
      result.sigma_analytic ? json(*result.sigma_analytic) : json(nullptr);
  j["sigma_estimated"] =
      result.sigma_estimated ? json(*result.sigma_estimated) : json(nullptr);
  j["sigma_mismatch"] = result.sigma_mismatch;
  return j.dump(2) + "\n";
}

ExperimentResult result_from_json_string(const std::string& text) {
  const json j = json::parse(text);
  ExperimentResult result;
  result.config = config_from_json(j.at("config"));
  result.config_hash = j.at("config_hash").get<std::string>();
  result.seed = j.at("seed").get<std::uint64_t>();
  result.kernel = j.at("kernel").get<std::string>();
  result.process = j.at("process").get<std::string>();
  for (const auto& row : j.at("rows")) result.rows.push_back(row_from_json(row));
  for (const auto& p : j.at("ui_profile")) {
    result.ui_profile.push_back(
        {p.at("threshold").get<double>(),
         p.at("sup_tail_second_moment").get<double>()});
  }
  result.degenerate = j.at("degenerate").get<bool>();
  result.applicability_binding = j.at("applicability").get<std::string>();
  if (!j.at("sigma_analytic").is_null())
    result.sigma_analytic = j.at("sigma_analytic").get<double>();
  if (!j.at("sigma_estimated").is_null())
    result.sigma_estimated = j.at("sigma_estimated").get<double>();
  result.sigma_mismatch = j.at("sigma_mismatch").get<bool>();
  return result;
}

std::string to_csv(const RateReport& report) {
  std::ostringstream os;
  os << "config_hash,seed,order,n,rms,slope,slope_se\n";
  for (const auto& order : report.fit.orders) {
    for (std::size_t g = 0; g < report.fit.n_grid.size(); ++g) {
      os << report.config_hash << "," << report.seed << "," << order.order
         << "," << report.fit.n_grid[g] << "," << format_double(order.rms[g])
         << ",";
      if (order.fit) {
        os << format_double(order.fit->slope) << ","
           << format_double(order.fit->slope_se);
      } else {
        os << "undefined,undefined";
      }
      os << "\n";
    }
  }
  return os.str();
}

std::string to_json_string(const RateReport& report) {
  json j;
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["n_grid"] = report.fit.n_grid;
  j["orders"] = json::array();
  for (const auto& order : report.fit.orders) {
    json o;
    o["order"] = order.order;
    o["rms"] = order.rms;
    if (order.fit) {
      o["slope"] = order.fit->slope;
      o["slope_se"] = order.fit->slope_se;
      o["intercept"] = order.fit->intercept;
    } else {
      o["slope"] = nullptr;
    }
    j["orders"].push_back(o);
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const DiagnoseReport& report) {
  std::ostringstream os;
  os << "config_hash,seed,section,x,value,se\n";
  for (const auto& p : report.ui) {
    os << report.config_hash << "," << report.seed << ",ui_profile,"
       << format_double(p.threshold) << ","
       << format_double(p.sup_tail_second_moment) << ",0\n";
  }
  if (report.lindeberg_available) {
    for (const auto& p : report.lindeberg) {
      os << report.config_hash << "," << report.seed << ",lindeberg," << p.n
         << "," << format_double(p.ratio) << "," << format_double(p.se)
         << "\n";
    }
  }
  return os.str();
}

std::string to_json_string(const DiagnoseReport& report) {
  json j;
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["ui_profile"] = json::array();
  for (const auto& p : report.ui) {
    j["ui_profile"].push_back(
        {{"threshold", p.threshold},
         {"sup_tail_second_moment", p.sup_tail_second_moment}});
  }
  j["epsilon"] = report.epsilon;
  j["lindeberg_available"] = report.lindeberg_available;
  j["lindeberg"] = json::array();
  for (const auto& p : report.lindeberg) {
    j["lindeberg"].push_back({{"n", p.n}, {"ratio", p.ratio}, {"se", p.se}});
  }
  return j.dump(2) + "\n";
}

std::string emit_report(const ExperimentResult& result,
                        const std::string& format,
                        const std::string& out_dir) {
  const std::string path =
      output_path(out_dir, "converge", result.config_hash, format);
  write_file(path, format == "csv" ? to_csv(result) : to_json_string(result));
  return path;
}

std::string emit_report(const RateReport& report, const std::string& format,
                        const std::string& out_dir) {
  const std::string path =
      output_path(out_dir, "rates", report.config_hash, format);
  write_file(path, format == "csv" ? to_csv(report) : to_json_string(report));
  return path;
}

std::string emit_report(const DiagnoseReport& report, const std::string& format,
                        const std::string& out_dir) {
  const std::string path =
      output_path(out_dir, "diagnose", report.config_hash, format);
  write_file(path, format == "csv" ? to_csv(report) : to_json_string(report));
  return path;
}

}  // namespace ustatlab
