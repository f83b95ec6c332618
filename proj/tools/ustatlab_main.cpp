// Command-line front end: converge / rates / diagnose experiment runners,
// ad-hoc w2 distances between sample files, and the kernel catalog.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ustatlab/format.hpp"
#include "ustatlab/harness.hpp"
#include "ustatlab/kernels.hpp"
#include "ustatlab/wasserstein.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericError = 3;

struct Overrides {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> pairs;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file");
    auto opt = [&](const std::string& flag, const std::string& key,
                   const std::string& help, bool list = false) {
      cmd->add_option_function<std::string>(
          flag,
          [this, key, list](const std::string& v) {
            std::string value = v;
            if (list && !value.empty() && value.front() != '[')
              value = "[" + value + "]";
            pairs.emplace_back(key, value);
          },
          help);
    };
    opt("--kernel", "kernel", "catalog kernel name");
    opt("--process", "process", "process spec, e.g. ar1_gaussian(0.5,1)");
    opt("--n-grid", "n_grid", "comma-separated sample sizes", true);
    opt("--reps", "reps", "replications per n");
    opt("--seed", "seed", "base RNG seed");
    opt("--sigma", "sigma", "sigma source: analytic|estimated");
    opt("--format", "format", "report format: csv|json");
    opt("--out", "out", "output directory");
    opt("--orders", "orders", "component orders for rate fits", true);
    opt("--enumeration-cap", "enumeration_cap", "max tuples for exact U-stat");
    opt("--subsets", "incomplete_subsets", "subsets for the incomplete estimator");
    opt("--r-exponent", "r_exponent", "declared polynomial mixing rate");
    opt("--timing", "record_timing", "record wall_ms (breaks byte-stability)");
    opt("--threads", "threads", "worker threads, 0 = hardware");
  }

  ustatlab::ExperimentConfig build() const {
    ustatlab::ExperimentConfig config;
    if (!config_path.empty()) config = ustatlab::parse_config_file(config_path);
    for (const auto& [key, value] : pairs) config.set(key, value);
    return config;
  }
};

std::vector<double> read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ustatlab::ConfigError("cannot open sample file: " + path);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(b, e - b + 1);
    size_t pos = 0;
    double v;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw ustatlab::ConfigError(path + ":" + std::to_string(line_no) +
                                  ": not a number: " + tok);
    }
    if (pos != tok.size())
      throw ustatlab::ConfigError(path + ":" + std::to_string(line_no) +
                                  ": not a number: " + tok);
    if (!std::isfinite(v))
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": non-finite value");
    values.push_back(v);
  }
  if (values.empty()) throw ustatlab::ConfigError(path + ": empty sample file");
  return values;
}

void print_rows(const ustatlab::ExperimentResult& result) {
  std::cout << "kernel=" << result.kernel << " process=" << result.process
            << " hash=" << result.config_hash << "\n";
  std::cout << "applicability: " << result.applicability_binding << "\n";
  if (result.degenerate) {
    std::cout << "warning: kernel is degenerate (order "
              << result.rows.front().degeneracy_order
              << "); sqrt(n) U_h collapses and d2 to N(0,sigma) is not "
                 "expected to converge\n";
  }
  if (result.sigma_mismatch) {
    std::cout << "warning: analytic and estimated sigma^2 disagree by more "
                 "than 15%\n";
  }
  std::cout << "  n       d2_full     d2_linear   rms_rem     mean_square  "
               "estimator\n";
  for (const auto& row : result.rows) {
    std::ostringstream os;
    os << "  " << std::left << std::setw(7) << row.n << " " << std::setw(11)
       << ustatlab::format_double(row.d2_full).substr(0, 10) << " "
       << std::setw(11)
       << ustatlab::format_double(row.d2_linear).substr(0, 10) << " "
       << std::setw(11)
       << ustatlab::format_double(row.rms_remainder).substr(0, 10) << " "
       << std::setw(12)
       << ustatlab::format_double(row.mean_square).substr(0, 11) << " "
       << (row.exact_estimator ? "exact" : "incomplete");
    std::cout << os.str() << "\n";
  }
}

int run_converge(const Overrides& overrides) {
  const auto config = overrides.build();
  const auto result = ustatlab::run_convergence_experiment(config);
  const std::string path =
      ustatlab::emit_report(result, config.format, config.out);
  print_rows(result);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_rates(const Overrides& overrides) {
  const auto config = overrides.build();
  const auto report = ustatlab::run_rate_experiment(config);
  for (const auto& order : report.fit.orders) {
    std::cout << "order " << order.order << ": ";
    if (order.fit) {
      std::cout << "slope " << ustatlab::format_double(order.fit->slope)
                << " +- " << ustatlab::format_double(order.fit->slope_se)
                << "\n";
    } else {
      std::cout << "slope undefined (component vanishes)\n";
    }
  }
  const std::string path =
      ustatlab::emit_report(report, config.format, config.out);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_diagnose_cmd(const Overrides& overrides, double epsilon) {
  const auto config = overrides.build();
  const auto report = ustatlab::run_diagnose(config, epsilon);
  std::cout << "uniform integrability profile (threshold -> sup tail second "
               "moment):\n";
  for (const auto& p : report.ui) {
    std::cout << "  K=" << ustatlab::format_double(p.threshold) << " -> "
              << ustatlab::format_double(p.sup_tail_second_moment) << "\n";
  }
  if (report.lindeberg_available) {
    std::cout << "Lindeberg ratios (eps=" << ustatlab::format_double(epsilon)
              << "):\n";
    for (const auto& p : report.lindeberg) {
      std::cout << "  n=" << p.n << " -> " << ustatlab::format_double(p.ratio)
                << " (se " << ustatlab::format_double(p.se) << ")\n";
    }
  } else {
    std::cout << "Lindeberg ratios unavailable (mixing process or no "
                 "closed-form h1)\n";
  }
  const std::string path =
      ustatlab::emit_report(report, config.format, config.out);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_w2(const std::string& file_a, const std::string& file_b) {
  const ustatlab::EmpiricalDistribution a(read_sample_file(file_a));
  const ustatlab::EmpiricalDistribution b(read_sample_file(file_b));
  std::cout << ustatlab::format_double(ustatlab::w2_empirical_empirical(a, b))
            << "\n";
  return 0;
}

int run_catalog() {
  std::cout << "kernels:\n";
  for (const auto& kernel : ustatlab::builtin_catalog()) {
    std::cout << "  " << std::left << std::setw(16) << kernel.name()
              << " degree " << kernel.degree() << ", claimed L_p order "
              << ustatlab::format_double(kernel.moment_order()) << "\n";
  }
  std::cout << "processes:\n"
            << "  iid_normal(mu,sigma)\n"
            << "  iid_uniform(a,b)\n"
            << "  iid_pareto(alpha,x_min)    # alpha > 2\n"
            << "  ar1_gaussian(phi,sigma_eps) # |phi| < 1\n"
            << "  ma_q_gaussian(c0,c1,...,cq)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"U-statistic convergence laboratory"};
  app.require_subcommand(1);

  Overrides converge_opts, rates_opts, diagnose_opts;
  double epsilon = 0.1;
  std::string w2_a, w2_b;

  CLI::App* converge =
      app.add_subcommand("converge", "replicated CLT + Wasserstein experiment");
  converge_opts.add(converge);

  CLI::App* rates =
      app.add_subcommand("rates", "component norm decay rate fits");
  rates_opts.add(rates);

  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "uniform integrability and Lindeberg profiles");
  diagnose_opts.add(diagnose);
  diagnose->add_option("--epsilon", epsilon, "Lindeberg epsilon")
      ->check(CLI::PositiveNumber);

  CLI::App* w2 =
      app.add_subcommand("w2", "W2 distance between two sample files");
  w2->add_option("file_a", w2_a, "sample file, one float per line")->required();
  w2->add_option("file_b", w2_b, "sample file, one float per line")->required();

  app.add_subcommand("catalog", "list kernels and process families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (app.got_subcommand("converge")) return run_converge(converge_opts);
    if (app.got_subcommand("rates")) return run_rates(rates_opts);
    if (app.got_subcommand("diagnose"))
      return run_diagnose_cmd(diagnose_opts, epsilon);
    if (app.got_subcommand("w2")) return run_w2(w2_a, w2_b);
    if (app.got_subcommand("catalog")) return run_catalog();
  } catch (const ustatlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumericError;
  }
  return 0;
}
