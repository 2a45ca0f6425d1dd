// krcd command-line tool.
//
// Exit status: 0 support_null / success, 3 reject_null, 1 validation failure
// or runtime error, 2 usage or configuration error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "krcd/confounder_test.hpp"
#include "krcd/datagen.hpp"
#include "krcd/error.hpp"
#include "krcd/evalharness.hpp"
#include "krcd/io.hpp"
#include "krcd/oracle.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitReject = 3;

std::string command_line(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) out += ' ';
    out += argv[i];
  }
  return out;
}

void write_with_manifest(const std::string& path, const std::string& contents, krcd::RunManifest manifest) {
  krcd::write_text_file(path, contents);
  manifest.outputs = {path};
  manifest.finished_at = krcd::utc_timestamp();
  krcd::write_text_file(krcd::manifest_path_for(path), manifest.to_json().dump(2) + "\n");
}

krcd::KernelSpec kernel_from_flags(const std::string& name, int degree, double offset,
                                   double bandwidth, bool median) {
  switch (krcd::kernel_family_from_string(name)) {
    case krcd::KernelFamily::linear:
      return krcd::KernelSpec::linear();
    case krcd::KernelFamily::polynomial:
      return krcd::KernelSpec::polynomial(degree, offset);
    case krcd::KernelFamily::gaussian:
      if (median || bandwidth <= 0.0) return krcd::KernelSpec::gaussian();
      return krcd::KernelSpec::gaussian(bandwidth);
  }
  throw krcd::ArgumentError("unknown kernel: " + name);
}

struct SimulateArgs {
  std::string scenario = "single_env";
  double rho = 0.0;
  long n = 1000;
  long dx = 3;
  long du = 3;
  long envs = 2;
  std::uint64_t seed = 0;
  std::string out;
  bool include_hidden = false;
};

int run_simulate(const SimulateArgs& a, const std::string& invocation) {
  krcd::RunManifest manifest;
  manifest.started_at = krcd::utc_timestamp();
  krcd::ScenarioConfig config;
  config.scenario = krcd::scenario_from_string(a.scenario);
  config.rho = a.rho;
  config.samples = a.n;
  config.dx = a.dx;
  config.du = a.du;
  if (config.scenario == krcd::Scenario::binary_synthetic) {
    config.dx = 1;
    config.du = 1;
  }
  config.n_envs = a.envs;
  config.seed = a.seed;
  config.validate();

  const krcd::GeneratedDataset data = krcd::generate(config);
  std::ostringstream csv;
  krcd::write_dataset_csv(csv, data, a.include_hidden);

  manifest.command = invocation;
  manifest.config = krcd::to_json(config);
  manifest.config["include_hidden"] = a.include_hidden;
  manifest.seed = a.seed;
  write_with_manifest(a.out, csv.str(), manifest);
  return kExitOk;
}

struct DetectArgs {
  std::string input;
  std::string kernel = "poly";
  int degree = 2;
  double offset = 1.0;
  double bandwidth = 0.0;
  bool median = false;
  long p_dim = 0;
  double lambda = 1e-8;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool random_basis = false;
  std::string out;
};

int run_detect(const DetectArgs& a, const std::string& invocation) {
  krcd::RunManifest manifest;
  manifest.started_at = krcd::utc_timestamp();
  const krcd::CsvDataset csv = krcd::read_dataset_csv_file(a.input);
  for (const auto& w : csv.warnings) std::cerr << "warning: " << w << '\n';

  krcd::RidgeConfig config;
  config.kernel = kernel_from_flags(a.kernel, a.degree, a.offset, a.bandwidth, a.median);
  const long n = static_cast<long>(csv.data.samples());
  config.basis_size = a.p_dim > 0 ? a.p_dim : std::min<long>(40, n - 1);
  config.lambda = a.lambda;
  config.seed = a.seed;
  config.selection = a.random_basis ? krcd::BasisSelection::seeded_random : krcd::BasisSelection::first_p;

  const krcd::TestResult result = krcd::detect(csv.data, config, a.alpha);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  const std::string json = krcd::to_json(result).dump(2) + "\n";
  std::cout << json;

  if (!a.out.empty()) {
    manifest.command = invocation;
    manifest.config = krcd::to_json(config);
    manifest.config["alpha_level"] = a.alpha;
    manifest.seed = a.seed;
    manifest.inputs = {a.input};
    write_with_manifest(a.out, json, manifest);
  }
  return result.verdict == krcd::Verdict::reject_null ? kExitReject : kExitOk;
}

struct BenchmarkArgs {
  std::string sweep;
  std::vector<double> rho;
  std::vector<double> lambda;
  std::vector<long> n;
  std::vector<long> p;
  long dx = 3;
  int repeats = 30;
  int runs = 3;
  std::string scenario = "single_env";
  std::uint64_t seed = 0;
  double alpha = 0.05;
  int jobs = 1;
  std::string out;
};

template <typename T>
T single_value(const std::vector<T>& values, const char* flag) {
  if (values.size() != 1) {
    throw krcd::ConfigurationError(std::string(flag) + " takes a single value for this sweep");
  }
  return values.front();
}

int run_benchmark(BenchmarkArgs a, const std::string& invocation) {
  krcd::RunManifest manifest;
  manifest.started_at = krcd::utc_timestamp();
  manifest.command = invocation;
  manifest.seed = a.seed;

  krcd::SweepConfig config;
  config.repeats = a.repeats;
  config.base_seed = a.seed;
  config.alpha_level = a.alpha;
  config.jobs = a.jobs;
  config.scenario.scenario = krcd::scenario_from_string(a.scenario);
  config.scenario.dx = a.dx;
  if (config.scenario.scenario == krcd::Scenario::binary_synthetic) {
    config.scenario.dx = 1;
    config.scenario.du = 1;
  }

  std::ostringstream csv;
  ordered_json json;
  if (a.sweep == "detection" || a.sweep == "auc") {
    if (a.rho.empty()) a.rho = {0.0, 0.25, 0.5, 1.0, 2.0};
    if (a.sweep == "auc" && std::find(a.rho.begin(), a.rho.end(), 0.0) == a.rho.end()) {
      a.rho.insert(a.rho.begin(), 0.0);
    }
    config.rho_values = a.rho;
    config.sample_size = a.n.empty() ? 1000 : single_value(a.n, "--n");
    config.ridge.basis_size = a.p.empty() ? 40 : single_value(a.p, "--p");
    config.ridge.lambda = a.lambda.empty() ? 1e-8 : single_value(a.lambda, "--lambda");
    const krcd::MetricsReport report = krcd::detection_rate_sweep(config);
    json = krcd::to_json(report);
    krcd::write_records_csv(csv, report.records);
  } else if (a.sweep == "lambda-table") {
    if (a.rho.empty()) a.rho = {0.25, 0.5, 1.0, 2.0};
    if (a.lambda.empty()) a.lambda = {1e-12, 1e-8, 1e-4, 1.0};
    config.rho_values = a.rho;
    config.sample_size = a.n.empty() ? 1000 : single_value(a.n, "--n");
    config.ridge.basis_size = a.p.empty() ? 40 : single_value(a.p, "--p");
    const krcd::LambdaTable table = krcd::lambda_sensitivity(a.lambda, a.rho, config);
    json = krcd::to_json(table);
    json["config"] = krcd::to_json(config);
    krcd::write_records_csv(csv, table.records);
  } else if (a.sweep == "runtime") {
    if (a.n.empty()) a.n = {500, 1000, 2000, 4000};
    if (a.p.empty()) a.p = {10, 20, 40};
    const std::vector<Eigen::Index> n_grid(a.n.begin(), a.n.end());
    const std::vector<Eigen::Index> p_grid(a.p.begin(), a.p.end());
    const krcd::RuntimeTable table = krcd::runtime_scaling(n_grid, p_grid, a.dx, config, a.runs);
    json = krcd::to_json(table);
    json["config"] = krcd::to_json(config);
  } else {
    throw krcd::ConfigurationError("unknown sweep: " + a.sweep);
  }

  const std::string text = json.dump(2) + "\n";
  std::cout << text;
  if (!a.out.empty()) {
    manifest.config = json.contains("config") ? json["config"] : ordered_json::object();
    manifest.config["sweep"] = a.sweep;
    write_with_manifest(a.out + ".json", text, manifest);
    if (a.sweep != "runtime") write_with_manifest(a.out + ".csv", csv.str(), manifest);
  }
  return kExitOk;
}

struct ValidateArgs {
  int repeats = 200;
  std::uint64_t seed = 0;
  double inject_lambda = 0.0;
  std::string out;
};

int run_validate(const ValidateArgs& a, const std::string& invocation) {
  krcd::RunManifest manifest;
  manifest.started_at = krcd::utc_timestamp();
  constexpr double kCoordTolerance = 1e-6;
  constexpr double kMaxNullRejection = 0.08;

  ordered_json json;
  bool passed = true;
  try {
    const double lambda = a.inject_lambda != 0.0 ? a.inject_lambda : 0.1;
    const krcd::OracleReport oracle = krcd::oracle_agreement_suite(20, a.seed, 30, 6, lambda);
    json["oracle"] = krcd::to_json(oracle);
    const bool oracle_ok = oracle.converged && oracle.max_coord_error < kCoordTolerance;

    krcd::ScenarioConfig scenario;
    scenario.seed = a.seed;
    const krcd::CalibrationReport calibration =
        krcd::monte_carlo_null_calibration(krcd::RidgeConfig{}, scenario, a.repeats);
    json["calibration"] = krcd::to_json(calibration);
    const bool calibration_ok = calibration.rejection_rate <= kMaxNullRejection;

    json["checks"] = {{"oracle_agreement", oracle_ok}, {"null_rejection_rate", calibration_ok}};
    passed = oracle_ok && calibration_ok;
  } catch (const krcd::Error& e) {
    json["error"] = e.what();
    passed = false;
  }
  json["passed"] = passed;

  const std::string text = json.dump(2) + "\n";
  (passed ? std::cout : std::cerr) << text;
  if (!a.out.empty()) {
    manifest.command = invocation;
    manifest.config = {{"repeats", a.repeats}, {"seed", a.seed}};
    manifest.seed = a.seed;
    write_with_manifest(a.out, text, manifest);
  }
  return passed ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-regression detection of hidden confounding"};
  app.set_version_flag("--version", std::string("krcd ") + KRCD_VERSION + " (format " +
                                        krcd::kFormatVersion + ")");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset as CSV");
  simulate->add_option("--scenario", sim.scenario, "single_env | multi_env | binary")->capture_default_str();
  simulate->add_option("--rho", sim.rho, "Confounding strength (0 = none)")->capture_default_str();
  simulate->add_option("--n", sim.n, "Samples")->capture_default_str();
  simulate->add_option("--dx", sim.dx, "Observed covariate dimension")->capture_default_str();
  simulate->add_option("--du", sim.du, "Hidden confounder dimension")->capture_default_str();
  simulate->add_option("--envs", sim.envs, "Environments (multi_env)")->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CSV path")->required();
  simulate->add_flag("--include-hidden", sim.include_hidden, "Also write the hidden u columns");

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Test a CSV dataset for hidden confounding");
  detect->add_option("--input", det.input, "CSV with y, t, x1..xd columns")->required();
  detect->add_option("--kernel", det.kernel, "linear | poly | gaussian")->capture_default_str();
  detect->add_option("--degree", det.degree, "Polynomial degree")->capture_default_str();
  detect->add_option("--offset", det.offset, "Polynomial offset")->capture_default_str();
  auto* bw = detect->add_option("--bandwidth", det.bandwidth, "Gaussian bandwidth");
  detect->add_flag("--median", det.median, "Gaussian bandwidth by the median heuristic")->excludes(bw);
  detect->add_option("--p-dim", det.p_dim, "Basis size P (default min(40, N-1))");
  detect->add_option("--lambda", det.lambda, "Ridge regularizer")->capture_default_str();
  detect->add_option("--alpha", det.alpha, "Family-wise level")->capture_default_str();
  detect->add_option("--seed", det.seed, "Seed for basis and bandwidth subsampling")->capture_default_str();
  detect->add_flag("--random-basis", det.random_basis, "Pick basis rows at random instead of the first P");
  detect->add_option("--out", det.out, "Also write the JSON result here");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Run evaluation sweeps");
  benchmark->add_option("--sweep", bench.sweep, "detection | auc | lambda-table | runtime")
      ->required()
      ->check(CLI::IsMember({"detection", "auc", "lambda-table", "runtime"}));
  benchmark->add_option("--rho", bench.rho, "Confounding strengths")->delimiter(',');
  benchmark->add_option("--lambda", bench.lambda, "Regularizers")->delimiter(',');
  benchmark->add_option("--n", bench.n, "Sample sizes")->delimiter(',');
  benchmark->add_option("--p", bench.p, "Basis sizes")->delimiter(',');
  benchmark->add_option("--dx", bench.dx, "Covariate dimension")->capture_default_str();
  benchmark->add_option("--repeats", bench.repeats, "Seeds per cell")->capture_default_str();
  benchmark->add_option("--runs", bench.runs, "Timing runs per grid point")->capture_default_str();
  benchmark->add_option("--scenario", bench.scenario)->capture_default_str();
  benchmark->add_option("--seed", bench.seed, "Base seed")->capture_default_str();
  benchmark->add_option("--alpha", bench.alpha)->capture_default_str();
  benchmark->add_option("--jobs", bench.jobs, "Parallel seeds")->capture_default_str();
  benchmark->add_option("--out", bench.out, "Output prefix for .json / .csv");

  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "Oracle agreement and null calibration checks");
  validate->add_option("--repeats", val.repeats, "Null calibration replications")->capture_default_str();
  validate->add_option("--seed", val.seed)->capture_default_str();
  validate->add_option("--inject-lambda", val.inject_lambda)->group("");
  validate->add_option("--out", val.out, "Also write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string invocation = command_line(argc, argv);
  try {
    if (*simulate) return run_simulate(sim, invocation);
    if (*detect) return run_detect(det, invocation);
    if (*benchmark) return run_benchmark(bench, invocation);
    if (*validate) return run_validate(val, invocation);
  } catch (const krcd::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const krcd::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
