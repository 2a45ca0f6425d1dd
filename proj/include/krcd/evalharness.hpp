#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "krcd/confounder_test.hpp"
#include "krcd/datagen.hpp"
#include "krcd/estimator.hpp"

namespace krcd {

struct SweepConfig {
  std::vector<double> rho_values{0.0, 0.25, 0.5, 1.0, 2.0};
  int repeats = 30;
  Eigen::Index sample_size = 1000;
  RidgeConfig ridge;
  ScenarioConfig scenario;  // template; rho, samples and seed are overwritten per run
  std::uint64_t base_seed = 0;
  double alpha_level = 0.05;
  int jobs = 1;  // parallel seeds; aggregation order is fixed

  void validate() const;
};

/// One detect call inside a sweep. Dataset seed = base_seed + repeat.
struct RunRecord {
  double rho = 0.0;
  double lambda = 0.0;
  int repeat = 0;
  std::uint64_t seed = 0;
  Verdict verdict = Verdict::support_null;
  double score = 0.0;
  double wall_ms = 0.0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) ... (1,1)
  double auc = 0.0;
};

struct RhoSummary {
  double rho = 0.0;
  int repeats = 0;
  int rejections = 0;
  double detection_rate = 0.0;
  std::optional<double> auc;  // against the rho = 0 runs, when present
};

struct MetricsReport {
  SweepConfig config;
  std::vector<RhoSummary> rows;
  std::vector<RocPoint> roc_points;  // all rho > 0 runs vs rho = 0 runs
  std::optional<double> auc;
  std::vector<double> runtimes_ms;
  std::vector<RunRecord> records;
};

/// Threshold-sweep ROC over a continuous score (higher = more confounded).
/// Tied scores move in one diagonal step; AUC by the trapezoid rule.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels);

/// Runs `repeats` seeded detections at every rho.
MetricsReport detection_rate_sweep(const SweepConfig& config);

struct LambdaTable {
  std::vector<double> lambdas;
  std::vector<double> rhos;
  Matrix auc;  // rhos x lambdas
  std::vector<RunRecord> records;
};

/// AUC of `repeats` positive runs at each rho against `repeats` rho = 0 runs
/// at the same lambda, scored by the max non-degenerate |z|.
LambdaTable lambda_sensitivity(const std::vector<double>& lambdas, const std::vector<double>& rhos,
                               const SweepConfig& config);

struct RuntimeRow {
  Eigen::Index samples = 0;
  Eigen::Index basis_size = 0;
  double median_ms = 0.0;
};

struct RuntimeTable {
  std::vector<RuntimeRow> rows;  // |N grid| x |P grid|, N-major
  std::optional<double> slope_vs_n;  // log-log at the smallest P; needs >= 2 N values
  std::optional<double> slope_vs_p;  // log-log at the largest N; needs >= 2 P values
};

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Single-threaded wall time of detect (median of `runs`), data generation excluded.
RuntimeTable runtime_scaling(const std::vector<Eigen::Index>& sample_grid,
                             const std::vector<Eigen::Index>& basis_grid, Eigen::Index dx,
                             const SweepConfig& config, int runs = 3);

}  // namespace krcd
