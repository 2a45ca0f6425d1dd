#include "krcd/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "krcd/error.hpp"
#include "krcd/random.hpp"

namespace krcd {

namespace {

struct WeightedProblem {
  const BasisKernel& k;
  const Vector& y;
  Vector w;
  double lambda;
  double inv_n;

  WeightedProblem(const BasisKernel& k_, const Vector& y_, Vector w_, double lambda_)
      : k(k_), y(y_), w(std::move(w_)), lambda(lambda_),
        inv_n(1.0 / static_cast<double>(y_.size())) {}

  double objective(const Vector& alpha) const {
    const Vector r = y - k.values.transpose() * alpha;
    return inv_n * (w.array() * r.array().square()).sum() + inv_n * lambda * alpha.squaredNorm();
  }

  Vector gradient(const Vector& alpha) const {
    const Vector r = k.values.transpose() * alpha - y;
    return 2.0 * inv_n * (k.values * (w.array() * r.array()).matrix() + lambda * alpha);
  }
};

// Barzilai-Borwein gradient descent. The objective is a strictly convex
// quadratic, so the unsafeguarded iteration converges; the first step is
// the exact line-search length along the gradient.
OracleSolution gradient_descent(const WeightedProblem& problem, const OracleOptions& options) {
  if (!(options.tol > 0.0)) throw ArgumentError("oracle tolerance must be > 0");
  if (!(problem.lambda > 0.0)) throw ConfigurationError("lambda must be > 0");

  OracleSolution out;
  Vector alpha = Vector::Zero(problem.k.basis_size());
  Vector grad = problem.gradient(alpha);
  double step = 0.0;
  {
    const Vector curvature = problem.gradient(Vector(alpha + grad)) - grad;
    const double gg = grad.dot(curvature);
    step = gg > 0.0 ? grad.squaredNorm() / gg : 1.0;
  }

  long it = 0;
  for (; it < options.max_iterations; ++it) {
    if (grad.norm() < options.tol) break;
    const Vector next = alpha - step * grad;
    Vector next_grad = problem.gradient(next);
    const Vector s = next - alpha;
    const Vector dg = next_grad - grad;
    const double sy = s.dot(dg);
    alpha = next;
    grad = std::move(next_grad);
    if (s.squaredNorm() == 0.0 || !(sy > 0.0)) {
      ++it;
      break;
    }
    step = s.squaredNorm() / sy;
  }
  out.iterations = it;
  out.gradient_norm = grad.norm();
  out.converged = out.gradient_norm < options.tol;
  out.alpha = std::move(alpha);
  return out;
}

Vector unit_or(const Vector& weights, Eigen::Index n) {
  return weights.size() == 0 ? Vector::Ones(n) : weights;
}

void check_shapes(const BasisKernel& k, const Vector& y) {
  if (y.size() != k.samples()) throw ArgumentError("outcome length does not match kernel columns");
}

}  // namespace

double ridge_objective(const BasisKernel& k, const Vector& y, const Vector& weights,
                       const Vector& alpha, double lambda) {
  check_shapes(k, y);
  return WeightedProblem(k, y, unit_or(weights, y.size()), lambda).objective(alpha);
}

OracleSolution oracle_minimize_kls(const BasisKernel& k, const Vector& y, double lambda,
                                   const OracleOptions& options) {
  check_shapes(k, y);
  return gradient_descent(WeightedProblem(k, y, Vector::Ones(y.size()), lambda), options);
}

OracleSolution oracle_minimize_hkls(const BasisKernel& k, const Vector& y,
                                    const Vector& squared_norms, double lambda,
                                    const OracleOptions& options) {
  check_shapes(k, y);
  if (squared_norms.size() != y.size()) throw ArgumentError("weight length does not match N");
  return gradient_descent(WeightedProblem(k, y, squared_norms, lambda), options);
}

OracleReport oracle_agreement_suite(int instances, std::uint64_t seed, Eigen::Index samples,
                                    Eigen::Index basis_size, double lambda) {
  OracleReport report;
  const KernelSpec kernels[] = {KernelSpec::linear(), KernelSpec::polynomial(2, 1.0),
                                KernelSpec::gaussian()};
  constexpr Eigen::Index kCovariates = 2;
  for (const KernelSpec& family : kernels) {
    for (int i = 0; i < instances; ++i) {
      const std::uint64_t instance_seed = seed + static_cast<std::uint64_t>(i);
      const CounterRng rng(instance_seed, 0x0facaffe);
      std::uint64_t counter = 0;
      RowMatrix z(samples, kCovariates + 1);
      for (Eigen::Index r = 0; r < samples; ++r) {
        for (Eigen::Index c = 0; c <= kCovariates; ++c) z(r, c) = rng.uniform(counter++, -1.0, 1.0);
      }
      Vector y(samples);
      for (Eigen::Index r = 0; r < samples; ++r) {
        y(r) = z.row(r).squaredNorm() + rng.uniform(counter++, -0.1, 0.1);
      }
      const DesignMatrix design(std::move(z));
      const KernelSpec spec = resolve_kernel(family, design, instance_seed);
      const BasisKernel k = basis_kernel(spec, design, basis_size);
      const WeightedBasisKernel k_psi = weighted_basis(k, design);

      const Vector closed_kls = fit_kls(k, y, lambda);
      const Vector closed_hkls = fit_hkls(k, k_psi, y, lambda);
      const OracleSolution gd_kls = oracle_minimize_kls(k, y, lambda);
      const OracleSolution gd_hkls = oracle_minimize_hkls(k, y, k_psi.squared_norms, lambda);

      report.max_coord_error = std::max({report.max_coord_error,
                                         (gd_kls.alpha - closed_kls).cwiseAbs().maxCoeff(),
                                         (gd_hkls.alpha - closed_hkls).cwiseAbs().maxCoeff()});
      const double gap_kls = ridge_objective(k, y, {}, gd_kls.alpha, lambda) -
                             ridge_objective(k, y, {}, closed_kls, lambda);
      const double gap_hkls = ridge_objective(k, y, k_psi.squared_norms, gd_hkls.alpha, lambda) -
                              ridge_objective(k, y, k_psi.squared_norms, closed_hkls, lambda);
      for (double gap : {gap_kls, gap_hkls}) {
        if (std::abs(gap) > std::abs(report.objective_gap)) report.objective_gap = gap;
      }
      report.iterations = std::max({report.iterations, gd_kls.iterations, gd_hkls.iterations});
      report.converged = report.converged && gd_kls.converged && gd_hkls.converged;
      ++report.instances;
    }
  }
  return report;
}

double ks_distance_to_normal(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-values[i] / std::sqrt(2.0));
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - cdf),
                  std::abs(cdf - static_cast<double>(i) / n)});
  }
  return d;
}

CalibrationReport monte_carlo_null_calibration(
    const RidgeConfig& config, const std::function<ObservedData(std::uint64_t)>& draw,
    int repeats, std::uint64_t base_seed, double alpha_level) {
  if (repeats < 100) throw ConfigurationError("null calibration needs at least 100 repeats");
  CalibrationReport report;
  report.repeats = repeats;
  std::vector<double> pooled;
  int rejections = 0;
  for (int r = 0; r < repeats; ++r) {
    const TestResult result = detect(draw(base_seed + static_cast<std::uint64_t>(r)), config,
                                     alpha_level);
    if (result.verdict == Verdict::reject_null) ++rejections;
    for (Eigen::Index j = 0; j < result.z_scores.size(); ++j) {
      if (!result.degenerate_coords[static_cast<std::size_t>(j)]) {
        pooled.push_back(result.z_scores(j));
      }
    }
  }
  report.rejection_rate = static_cast<double>(rejections) / repeats;
  report.pooled_z = static_cast<long>(pooled.size());
  if (!pooled.empty()) {
    const Eigen::Map<const Vector> z(pooled.data(), static_cast<Eigen::Index>(pooled.size()));
    report.z_mean = z.mean();
    report.z_var = (z.array() - report.z_mean).square().mean();
  }
  report.ks_distance = ks_distance_to_normal(std::move(pooled));
  return report;
}

CalibrationReport monte_carlo_null_calibration(const RidgeConfig& config,
                                               const ScenarioConfig& scenario, int repeats,
                                               double alpha_level) {
  if (scenario.rho != 0.0) throw ConfigurationError("null calibration requires rho = 0");
  scenario.validate();
  return monte_carlo_null_calibration(
      config,
      [&scenario](std::uint64_t seed) {
        ScenarioConfig cfg = scenario;
        cfg.seed = seed;
        return generate(cfg).observed();
      },
      repeats, scenario.seed, alpha_level);
}

}  // namespace krcd
