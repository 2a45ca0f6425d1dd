#include "krcd/confounder_test.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "krcd/error.hpp"

namespace krcd {

namespace {

constexpr double kMinPValue = 1e-300;

// Shared by difference_operator and detect so both see identical factorizations.
struct FittedSystems {
  RegularizedSolver kls;
  RegularizedSolver hkls;

  FittedSystems(const BasisKernel& k, const WeightedBasisKernel& k_psi, double lambda)
      : kls(kls_gram(k), lambda), hkls(hkls_gram(k, k_psi), lambda) {}

  // A_h^{-1} W (I - K^T A_k^{-1} K) with W = K (Psi - I), a rearrangement of
  // A_h^{-1} K_psi - A_k^{-1} K.
  Matrix difference(const BasisKernel& k, const WeightedBasisKernel& k_psi) const {
    const Matrix w = k.values * (k_psi.squared_norms.array() - 1.0).matrix().asDiagonal();
    const Matrix projected = kls.solve(k.values);
    return hkls.solve(Matrix(w - (w * k.values.transpose()) * projected));
  }
};

}  // namespace

std::string to_string(Verdict verdict) {
  return verdict == Verdict::reject_null ? "reject_null" : "support_null";
}

void ObservedData::validate() const {
  const Eigen::Index n = y.size();
  if (t.size() != n || x.rows() != n) {
    throw InputError("X, T and Y must have the same number of rows");
  }
  if (x.cols() < 1) throw InputError("at least one covariate column is required");
  if (!x.allFinite() || !t.allFinite() || !y.allFinite()) {
    throw InputError("observed data contains non-finite values");
  }
}

double TestResult::score() const {
  double best = 0.0;
  for (Eigen::Index j = 0; j < z_scores.size(); ++j) {
    if (!degenerate_coords[static_cast<std::size_t>(j)]) best = std::max(best, std::abs(z_scores(j)));
  }
  return best;
}

Matrix difference_operator(const BasisKernel& k, const WeightedBasisKernel& k_psi, double lambda) {
  const FittedSystems systems(k, k_psi, lambda);
  return systems.difference(k, k_psi);
}

Matrix covariance_matrix(const Matrix& v0, Eigen::Index samples) {
  Matrix v = static_cast<double>(samples) * (v0 * v0.transpose());
  return 0.5 * (v + v.transpose());
}

double degenerate_variance_tolerance(const Vector& delta, Eigen::Index samples) {
  const double inf_norm = delta.size() > 0 ? delta.cwiseAbs().maxCoeff() : 0.0;
  return 1e-14 * std::max(1.0, inf_norm * inf_norm * static_cast<double>(samples));
}

double two_sided_normal_p(double z) {
  const double p = std::erfc(std::abs(z) / std::sqrt(2.0));
  return std::clamp(p, kMinPValue, 1.0);
}

ZTest z_and_p(const Vector& delta, double sigma_sq, const Matrix& v, Eigen::Index samples) {
  const Eigen::Index p = delta.size();
  if (v.rows() != p || v.cols() != p) throw ArgumentError("covariance shape does not match delta");
  if (sigma_sq < 0.0) throw ArgumentError("sigma^2 must be >= 0");
  const double tol = degenerate_variance_tolerance(delta, samples);
  const double root_n = std::sqrt(static_cast<double>(samples));

  ZTest out;
  out.z_scores = Vector::Zero(p);
  out.p_values = Vector::Ones(p);
  out.degenerate.assign(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double variance = sigma_sq * std::max(0.0, v(j, j));
    if (!(variance >= tol)) {
      out.degenerate[static_cast<std::size_t>(j)] = true;
      continue;
    }
    const double z = root_n * delta(j) / std::sqrt(variance);
    out.z_scores(j) = z;
    out.p_values(j) = two_sided_normal_p(z);
  }
  return out;
}

BonferroniDecision bonferroni_verdict(const Vector& p_values, double alpha_level) {
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
    throw ConfigurationError("alpha level must lie in (0, 1)");
  }
  if (p_values.size() == 0) throw ArgumentError("no p-values to correct");
  BonferroniDecision out;
  out.threshold = alpha_level / static_cast<double>(p_values.size());
  out.rejected.resize(static_cast<std::size_t>(p_values.size()));
  for (Eigen::Index j = 0; j < p_values.size(); ++j) {
    const bool reject = p_values(j) < out.threshold;
    out.rejected[static_cast<std::size_t>(j)] = reject;
    if (reject) out.verdict = Verdict::reject_null;
  }
  return out;
}

TestResult detect(const ObservedData& data, const RidgeConfig& config, double alpha_level) {
  const auto start = std::chrono::steady_clock::now();
  data.validate();
  config.validate();
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
    throw ConfigurationError("alpha level must lie in (0, 1)");
  }
  const Eigen::Index n = data.samples();
  if (config.basis_size >= n) {
    throw ConfigurationError("basis size P must be smaller than N (P=" +
                             std::to_string(config.basis_size) + ", N=" + std::to_string(n) + ")");
  }

  const DesignMatrix z = DesignMatrix::from_treatment(data.t, data.x);
  const KernelSpec kernel = resolve_kernel(config.kernel, z, config.seed);
  const BasisKernel k =
      config.construction == GramConstruction::full_gram
          ? basis_from_gram(full_kernel(kernel, z), config.basis_size, config.selection, config.seed)
          : basis_kernel(kernel, z, config.basis_size, config.selection, config.seed);
  const WeightedBasisKernel k_psi = weighted_basis(k, z);

  const FittedSystems systems(k, k_psi, config.lambda);
  const Matrix v0 = systems.difference(k, k_psi);
  Vector alpha_kls = systems.kls.solve(Vector(k.values * data.y));
  const Vector residual = data.y - k.values.transpose() * alpha_kls;
  CoefficientPair coefficients = CoefficientPair::from_difference(std::move(alpha_kls), v0 * data.y);
  if (!coefficients.delta.allFinite()) throw NumericError("coefficient estimates are not finite");

  const Matrix v = covariance_matrix(v0, n);
  const double sigma_sq = residual.squaredNorm() / static_cast<double>(n);
  ZTest tests = z_and_p(coefficients.delta, sigma_sq, v, n);
  BonferroniDecision decision = bonferroni_verdict(tests.p_values, alpha_level);

  TestResult result;
  result.z_scores = std::move(tests.z_scores);
  result.p_values = std::move(tests.p_values);
  result.degenerate_coords = std::move(tests.degenerate);
  result.rejected_coords = std::move(decision.rejected);
  result.verdict = decision.verdict;
  result.sigma_sq = sigma_sq;
  result.alpha_level = alpha_level;
  result.basis_size = config.basis_size;
  result.samples = n;
  result.lambda = config.lambda;
  result.effective_lambda = std::max(systems.kls.effective_lambda(), systems.hkls.effective_lambda());
  result.kernel = kernel;
  result.coefficients = std::move(coefficients);

  if (auto warning = regularization_warning(kls_gram(k), config.lambda)) {
    result.warnings.push_back(*warning);
  }
  if (systems.kls.escalations() > 0 || systems.hkls.escalations() > 0) {
    result.warnings.push_back("factorization needed jitter; lambda escalated to " +
                              std::to_string(result.effective_lambda));
  }
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace krcd
