#include "krcd/evalharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>

#include "krcd/error.hpp"
#include "krcd/parallel.hpp"

namespace krcd {

namespace {

// Detect on `repeats` datasets at one (rho, lambda) cell; records[r] <-> seed base_seed + r.
std::vector<RunRecord> run_cell(const SweepConfig& config, double rho, double lambda) {
  std::vector<RunRecord> records(static_cast<std::size_t>(config.repeats));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  RidgeConfig ridge = config.ridge;
  ridge.lambda = lambda;

  parallel_for(
      records.size(),
      [&](std::size_t begin, std::size_t end) {
        try {
          for (std::size_t r = begin; r < end; ++r) {
            ScenarioConfig scenario = config.scenario;
            scenario.rho = rho;
            scenario.samples = config.sample_size;
            scenario.seed = config.base_seed + r;
            const ObservedData data = generate(scenario).observed();
            const TestResult result = detect(data, ridge, config.alpha_level);
            RunRecord& rec = records[r];
            rec.rho = rho;
            rec.lambda = lambda;
            rec.repeat = static_cast<int>(r);
            rec.seed = scenario.seed;
            rec.verdict = result.verdict;
            rec.score = result.score();
            rec.wall_ms = result.wall_time_ms;
          }
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      },
      std::max(1, config.jobs));
  if (failure) std::rethrow_exception(failure);
  return records;
}

double auc_of(const std::vector<RunRecord>& negatives, const std::vector<RunRecord>& positives) {
  std::vector<double> scores;
  std::vector<bool> labels;
  for (const auto& r : negatives) {
    scores.push_back(r.score);
    labels.push_back(false);
  }
  for (const auto& r : positives) {
    scores.push_back(r.score);
    labels.push_back(true);
  }
  return roc_auc(scores, labels).auc;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void SweepConfig::validate() const {
  if (repeats < 1) throw ConfigurationError("repeats must be >= 1");
  if (rho_values.empty()) throw ConfigurationError("rho grid must not be empty");
  if (sample_size < 2) throw ConfigurationError("sample size must be >= 2");
  ridge.validate();
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
    throw ConfigurationError("alpha level must lie in (0, 1)");
  }
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw ArgumentError("scores and labels differ in length");
  const auto positives = std::count(labels.begin(), labels.end(), true);
  const auto negatives = static_cast<std::ptrdiff_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw ArgumentError("ROC needs at least one positive and one negative label");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::ptrdiff_t tp = 0;
  std::ptrdiff_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      if (labels[order[i]]) {
        ++tp;
      } else {
        ++fp;
      }
    }
    const RocPoint next{static_cast<double>(fp) / static_cast<double>(negatives),
                        static_cast<double>(tp) / static_cast<double>(positives)};
    const RocPoint& prev = curve.points.back();
    curve.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    curve.points.push_back(next);
  }
  return curve;
}

MetricsReport detection_rate_sweep(const SweepConfig& config) {
  config.validate();
  MetricsReport report;
  report.config = config;

  std::vector<std::vector<RunRecord>> cells;
  const std::vector<RunRecord>* negatives = nullptr;
  for (double rho : config.rho_values) {
    cells.push_back(run_cell(config, rho, config.ridge.lambda));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (config.rho_values[i] == 0.0) negatives = &cells[i];
  }

  std::vector<RunRecord> all_positive;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    RhoSummary row;
    row.rho = config.rho_values[i];
    row.repeats = config.repeats;
    row.rejections = static_cast<int>(std::count_if(cell.begin(), cell.end(), [](const RunRecord& r) {
      return r.verdict == Verdict::reject_null;
    }));
    row.detection_rate = static_cast<double>(row.rejections) / config.repeats;
    if (negatives != nullptr && row.rho > 0.0) {
      row.auc = auc_of(*negatives, cell);
      all_positive.insert(all_positive.end(), cell.begin(), cell.end());
    }
    report.rows.push_back(row);
    for (const auto& r : cell) {
      report.records.push_back(r);
      report.runtimes_ms.push_back(r.wall_ms);
    }
  }
  if (negatives != nullptr && !all_positive.empty()) {
    std::vector<double> scores;
    std::vector<bool> labels;
    for (const auto& r : *negatives) {
      scores.push_back(r.score);
      labels.push_back(false);
    }
    for (const auto& r : all_positive) {
      scores.push_back(r.score);
      labels.push_back(true);
    }
    const RocCurve curve = roc_auc(scores, labels);
    report.roc_points = curve.points;
    report.auc = curve.auc;
  }
  return report;
}

LambdaTable lambda_sensitivity(const std::vector<double>& lambdas, const std::vector<double>& rhos,
                               const SweepConfig& config) {
  config.validate();
  if (lambdas.empty() || rhos.empty()) throw ConfigurationError("lambda and rho grids must be non-empty");
  for (double rho : rhos) {
    if (!(rho > 0.0)) throw ConfigurationError("lambda table rho values must be > 0");
  }
  LambdaTable table;
  table.lambdas = lambdas;
  table.rhos = rhos;
  table.auc.resize(static_cast<Eigen::Index>(rhos.size()), static_cast<Eigen::Index>(lambdas.size()));
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const auto negatives = run_cell(config, 0.0, lambdas[l]);
    table.records.insert(table.records.end(), negatives.begin(), negatives.end());
    for (std::size_t r = 0; r < rhos.size(); ++r) {
      const auto positives = run_cell(config, rhos[r], lambdas[l]);
      table.auc(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l)) = auc_of(negatives, positives);
      table.records.insert(table.records.end(), positives.begin(), positives.end());
    }
  }
  return table;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("slope fit needs >= 2 paired points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Vector lx(n), ly(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(x[static_cast<std::size_t>(i)] > 0.0) || !(y[static_cast<std::size_t>(i)] > 0.0)) {
      throw ArgumentError("log-log fit needs positive values");
    }
    lx(i) = std::log(x[static_cast<std::size_t>(i)]);
    ly(i) = std::log(y[static_cast<std::size_t>(i)]);
  }
  const Vector cx = lx.array() - lx.mean();
  const Vector cy = ly.array() - ly.mean();
  return cx.dot(cy) / cx.squaredNorm();
}

RuntimeTable runtime_scaling(const std::vector<Eigen::Index>& sample_grid,
                             const std::vector<Eigen::Index>& basis_grid, Eigen::Index dx,
                             const SweepConfig& config, int runs) {
  if (sample_grid.empty() || basis_grid.empty()) throw ConfigurationError("runtime grids must be non-empty");
  if (runs < 1) throw ConfigurationError("runs must be >= 1");
  config.ridge.validate();

  const int previous_threads = thread_count();
  set_thread_count(1);
  RuntimeTable table;
  try {
    for (Eigen::Index n : sample_grid) {
      ScenarioConfig scenario = config.scenario;
      scenario.samples = n;
      scenario.dx = dx;
      scenario.seed = config.base_seed;
      const ObservedData data = generate(scenario).observed();
      for (Eigen::Index p : basis_grid) {
        RidgeConfig ridge = config.ridge;
        ridge.basis_size = p;
        std::vector<double> times;
        for (int r = 0; r < runs; ++r) {
          const auto start = std::chrono::steady_clock::now();
          (void)detect(data, ridge, config.alpha_level);
          times.push_back(
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        }
        table.rows.push_back({n, p, median(times)});
      }
    }
  } catch (...) {
    set_thread_count(previous_threads);
    throw;
  }
  set_thread_count(previous_threads);

  const Eigen::Index smallest_p = *std::min_element(basis_grid.begin(), basis_grid.end());
  const Eigen::Index largest_n = *std::max_element(sample_grid.begin(), sample_grid.end());
  std::vector<double> nx, ny, px, py;
  for (const auto& row : table.rows) {
    if (row.basis_size == smallest_p) {
      nx.push_back(static_cast<double>(row.samples));
      ny.push_back(row.median_ms);
    }
    if (row.samples == largest_n) {
      px.push_back(static_cast<double>(row.basis_size));
      py.push_back(row.median_ms);
    }
  }
  if (nx.size() >= 2) table.slope_vs_n = log_log_slope(nx, ny);
  if (px.size() >= 2) table.slope_vs_p = log_log_slope(px, py);
  return table;
}

}  // namespace krcd
