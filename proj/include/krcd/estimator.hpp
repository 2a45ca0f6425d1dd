#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "krcd/kernel.hpp"

namespace krcd {

/// How the P x N basis block is obtained.
///  - full_gram: evaluate the whole N x N Gram matrix and keep P rows
///    (the reference procedure, O(N^2 d)).
///  - basis_rows: evaluate only the P rows (O(P N d)); identical values.
enum class GramConstruction { full_gram, basis_rows };

struct RidgeConfig {
  Eigen::Index basis_size = 40;
  double lambda = 1e-8;  // aggregate regularizer, N times the per-sample weight
  KernelSpec kernel = KernelSpec::polynomial();
  BasisSelection selection = BasisSelection::first_p;
  std::uint64_t seed = 0;
  GramConstruction construction = GramConstruction::full_gram;

  void validate() const;
};

struct CoefficientPair {
  Vector alpha_kls;
  Vector alpha_hkls;
  Vector delta;  // alpha_hkls - alpha_kls

  CoefficientPair() = default;
  CoefficientPair(Vector kls, Vector hkls)
      : alpha_kls(std::move(kls)), alpha_hkls(std::move(hkls)), delta(alpha_hkls - alpha_kls) {}

  /// Builds the pair from the KLS fit and a separately computed difference.
  static CoefficientPair from_difference(Vector kls, Vector diff) {
    CoefficientPair out;
    out.alpha_hkls = kls + diff;
    out.alpha_kls = std::move(kls);
    out.delta = std::move(diff);
    return out;
  }
};

/// Cholesky factorization of (G + lambda I) for a symmetric PSD G.
///
/// G is symmetrized as (G + G^T) / 2 first. If the factorization fails the
/// regularizer is multiplied by 10, at most three times, before a
/// NumericError carrying the final condition estimate is raised.
class RegularizedSolver {
 public:
  static constexpr int kMaxEscalations = 3;

  RegularizedSolver(const Matrix& gram, double lambda);

  Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }
  Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }

  double requested_lambda() const { return requested_lambda_; }
  double effective_lambda() const { return effective_lambda_; }
  int escalations() const { return escalations_; }
  /// Reciprocal 1-norm condition estimate from the factorization.
  double rcond() const { return llt_.rcond(); }

 private:
  Eigen::LLT<Matrix> llt_;
  double requested_lambda_;
  double effective_lambda_;
  int escalations_ = 0;
};

/// Warning text when lambda >= 0.1 ||G||_F / sqrt(P): the regularizer is then
/// no longer negligible against the Gram matrix and the asymptotic test
/// loses calibration and power.
std::optional<std::string> regularization_warning(const Matrix& gram, double lambda);

/// Solves (K K^T + lambda I) alpha = K Y.
Vector fit_kls(const BasisKernel& k, const Vector& y, double lambda);

/// Solves (K_psi K^T + lambda I) alpha = K_psi Y.
/// Evaluated as alpha_KLS + hkls_offset.
Vector fit_hkls(const BasisKernel& k, const WeightedBasisKernel& k_psi, const Vector& y,
                double lambda);

/// alpha_HKLS - alpha_KLS written as (K_psi K^T + lambda I)^{-1} K (Psi - I) r,
/// with r = Y - K^T alpha_KLS the KLS residual.
Vector hkls_offset(const BasisKernel& k, const WeightedBasisKernel& k_psi, const Vector& residual,
                   const RegularizedSolver& hkls);

/// (1/N) ||Y - K^T alpha||^2.
double residual_variance(const BasisKernel& k, const Vector& alpha, const Vector& y);

/// Gram matrices used by the two fits.
Matrix kls_gram(const BasisKernel& k);
Matrix hkls_gram(const BasisKernel& k, const WeightedBasisKernel& k_psi);

}  // namespace krcd
