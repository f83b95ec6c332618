#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ustatlab/harness.hpp"

using namespace ustatlab;

namespace {

ExperimentConfig quick_config() {
  ExperimentConfig config;
  config.kernel = "mean";
  config.process = "iid_normal(0,1)";
  config.n_grid = {50, 100};
  config.reps = 200;
  config.seed = 7;
  config.n_ref = 10000;
  config.center_mc_size = 10000;
  config.probe_size = 1000;
  config.fresh_tuples = 500;
  config.sigma_path_length = 20000;
  return config;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("config file parsing") {
  const std::string path = "test_config_tmp.cfg";
  {
    std::ofstream out(path);
    out << "# convergence experiment\n"
        << "kernel = \"variance\"\n"
        << "process = iid_normal(0,1)\n"
        << "n_grid = [50, 200]\n"
        << "reps = 300\n"
        << "seed = 99\n"
        << "sigma = \"estimated\"\n"
        << "record_timing = false\n"
        << "\n";
  }
  const ExperimentConfig config = parse_config_file(path);
  std::remove(path.c_str());
  CHECK(config.kernel == "variance");
  CHECK(config.process == "iid_normal(0,1)");
  CHECK(config.n_grid == std::vector<long>{50, 200});
  CHECK(config.reps == 300);
  CHECK(config.seed == 99);
  CHECK(config.sigma == "estimated");
  CHECK_FALSE(config.record_timing);
}

TEST_CASE("config validation and unknown keys") {
  ExperimentConfig config = quick_config();
  CHECK_THROWS_AS(config.set("not_a_key", "1"), ConfigError);

  config.reps = 50;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = quick_config();
  config.n_grid = {100, 50};
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = quick_config();
  config.sigma = "guess";
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = quick_config();
  config.process = "bogus(1)";
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = quick_config();
  config.n_grid = {1, 50};
  config.kernel = "variance";
  CHECK_THROWS_AS(run_convergence_experiment(config), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  const ExperimentConfig a = quick_config();
  ExperimentConfig b = quick_config();
  CHECK(a.hash() == b.hash());
  b.seed = 8;
  CHECK(a.hash() != b.hash());
  ExperimentConfig c = quick_config();
  c.out = "elsewhere";  // presentation knobs do not change the hash
  CHECK(a.hash() == c.hash());
}

TEST_CASE("mean kernel quick experiment: sane rows and determinism") {
  const ExperimentConfig config = quick_config();
  const ExperimentResult result = run_convergence_experiment(config);

  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[0].sigma_sq_used == 1.0);
  CHECK(result.rows[0].sigma_source == "analytic");
  CHECK(result.rows[0].applicable);
  CHECK(result.rows[0].degeneracy_order == 0);
  CHECK(result.rows[0].exact_estimator);
  CHECK(result.rows[0].wall_ms == 0.0);
  CHECK_FALSE(result.degenerate);
  for (const auto& row : result.rows) {
    CHECK(row.d2_full < 0.5);
    CHECK(std::isfinite(row.mean_square));
    // m = 1: the linear part is the statistic itself
    CHECK(row.d2_linear == row.d2_full);
    CHECK(row.rms_remainder == 0.0);
  }

  const ExperimentResult again = run_convergence_experiment(config);
  CHECK(to_csv(result) == to_csv(again));
  CHECK(to_json_string(result) == to_json_string(again));
  CHECK(result == again);
}

TEST_CASE("csv header matches the pinned schema") {
  const ExperimentResult result = run_convergence_experiment(quick_config());
  const std::string csv = to_csv(result);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header ==
        "config_hash,seed,n,R,d2_full,d2_linear,rms_remainder,mean_square,"
        "sigma_sq_used,sigma_source,applicable,degeneracy_order,wall_ms");
}

TEST_CASE("json round-trips to the same result") {
  const ExperimentResult result = run_convergence_experiment(quick_config());
  const ExperimentResult parsed = result_from_json_string(to_json_string(result));
  CHECK(parsed == result);
}

TEST_CASE("triangle chain binds the full distance") {
  ExperimentConfig config = quick_config();
  config.kernel = "variance";
  config.n_grid = {30, 60};
  config.reps = 150;
  const ExperimentResult result = run_convergence_experiment(config);
  for (const auto& row : result.rows) {
    CHECK(row.d2_full <= row.rms_remainder + row.d2_linear + 1e-10);
    CHECK(row.rms_remainder > 0.0);
  }
}

TEST_CASE("degenerate product kernel is flagged and collapses") {
  ExperimentConfig config = quick_config();
  config.kernel = "product";
  config.n_grid = {50, 100};
  config.reps = 400;
  const ExperimentResult result = run_convergence_experiment(config);
  CHECK(result.degenerate);
  CHECK(result.rows[0].degeneracy_order == 1);
  CHECK(result.rows[0].sigma_sq_used == 0.0);
  for (const auto& row : result.rows) {
    const double expect = 2.0 / (static_cast<double>(row.n) - 1.0);
    CHECK(std::abs(row.mean_square - expect) < 4.0 * row.mean_square_se);
    // d2 against the degenerate limit (point mass) equals the RMS
    CHECK(row.d2_full == doctest::Approx(std::sqrt(row.mean_square)));
  }
}

TEST_CASE("estimator switches to incomplete past the cap") {
  ExperimentConfig config = quick_config();
  config.kernel = "variance";
  config.n_grid = {40, 80};
  config.reps = 150;
  config.enumeration_cap = 1000;   // C(40,2) = 780 <= cap < C(80,2)
  config.incomplete_subsets = 2000;
  const ExperimentResult result = run_convergence_experiment(config);
  CHECK(result.rows[0].exact_estimator);
  CHECK_FALSE(result.rows[1].exact_estimator);
  const std::string json = to_json_string(result);
  CHECK(json.find("\"estimator\": \"incomplete\"") != std::string::npos);
}

TEST_CASE("estimated sigma fallback and mismatch flag") {
  ExperimentConfig config = quick_config();
  config.kernel = "variance";
  config.process = "ar1_gaussian(0.5,1)";  // no analytic LRV for quadratic h1
  config.n_grid = {30, 60};
  config.reps = 150;
  config.sigma = "analytic";
  const ExperimentResult result = run_convergence_experiment(config);
  CHECK_FALSE(result.sigma_analytic.has_value());
  REQUIRE(result.sigma_estimated.has_value());
  CHECK(result.rows[0].sigma_source == "estimated");
  CHECK(result.rows[0].sigma_sq_used == *result.sigma_estimated);
  CHECK_FALSE(result.sigma_mismatch);
}

TEST_CASE("negative control: heavy-tailed data fail the moment check") {
  ExperimentConfig config = quick_config();
  config.kernel = "variance";
  config.process = "iid_pareto(2.5,1)";
  config.n_grid = {30, 60};
  config.reps = 150;
  const ExperimentResult result = run_convergence_experiment(config);
  for (const auto& row : result.rows) {
    CHECK_FALSE(row.applicable);
    CHECK(std::isfinite(row.d2_full));
    CHECK(std::isfinite(row.mean_square));
  }
  CHECK(result.applicability_binding.find("not applicable") != std::string::npos);
}

TEST_CASE("declared polynomial mixing rate flows through the config") {
  ExperimentConfig config = quick_config();
  config.kernel = "variance";
  config.kernel_moment_order = 2.1;
  config.process = "ar1_gaussian(0.5,1)";
  config.r_exponent = 10.0;
  config.n_grid = {30, 60};
  config.reps = 150;
  const ExperimentResult result = run_convergence_experiment(config);
  CHECK_FALSE(result.rows[0].applicable);
  CHECK(result.applicability_binding.find("42") != std::string::npos);
}

TEST_CASE("rate experiment wiring") {
  ExperimentConfig config = quick_config();
  config.kernel = "variance";
  config.n_grid = {50, 100, 200, 500};
  config.reps = 150;
  CHECK_THROWS_WITH_AS(run_rate_experiment(config),
                       doctest::Contains("nothing to fit"), ConfigError);

  config.orders = {1};
  const RateReport report = run_rate_experiment(config);
  REQUIRE(report.fit.orders.size() == 1);
  REQUIRE(report.fit.orders[0].fit.has_value());
  CHECK(report.fit.orders[0].fit->slope < -0.3);
  CHECK(report.fit.orders[0].fit->slope > -0.7);
  const std::string csv = to_csv(report);
  CHECK(csv.find("config_hash,seed,order,n,rms,slope,slope_se") == 0);
}

TEST_CASE("diagnose report") {
  ExperimentConfig config = quick_config();
  config.n_grid = {100, 400};
  const DiagnoseReport report = run_diagnose(config, 0.1);
  CHECK(report.ui.size() == 6);
  for (std::size_t i = 1; i < report.ui.size(); ++i) {
    CHECK(report.ui[i].sup_tail_second_moment <=
          report.ui[i - 1].sup_tail_second_moment);
  }
  REQUIRE(report.lindeberg_available);
  REQUIRE(report.lindeberg.size() == 2);
  CHECK(report.lindeberg[1].ratio <= report.lindeberg[0].ratio);

  config.process = "ar1_gaussian(0.5,1)";
  const DiagnoseReport mixing = run_diagnose(config, 0.1);
  CHECK_FALSE(mixing.lindeberg_available);
}

TEST_CASE("emit_report writes byte-stable files") {
  namespace fs = std::filesystem;
  ExperimentConfig config = quick_config();
  config.out = "test_reports_tmp";
  const ExperimentResult result = run_convergence_experiment(config);

  const std::string csv_path = emit_report(result, "csv", config.out);
  const std::string first = slurp(csv_path);
  const ExperimentResult again = run_convergence_experiment(config);
  const std::string csv_path2 = emit_report(again, "csv", config.out);
  CHECK(csv_path == csv_path2);
  CHECK(first == slurp(csv_path2));

  const std::string json_path = emit_report(result, "json", config.out);
  CHECK(result_from_json_string(slurp(json_path)) == result);

  CHECK_THROWS_AS(emit_report(result, "xml", config.out), ConfigError);
  fs::remove_all(config.out);
}
