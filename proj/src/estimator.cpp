#include "krcd/estimator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "krcd/error.hpp"

namespace krcd {

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigurationError("lambda must be finite and > 0");
  }
}

void check_outcome(const BasisKernel& k, const Vector& y) {
  if (y.size() != k.samples()) throw ArgumentError("outcome length does not match kernel columns");
  if (!y.allFinite()) throw InputError("outcome contains non-finite values");
}

double condition_estimate(const Matrix& system) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(system, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

void RidgeConfig::validate() const {
  kernel.validate();
  check_lambda(lambda);
  if (basis_size < 1) throw ConfigurationError("basis size must be >= 1");
}

RegularizedSolver::RegularizedSolver(const Matrix& gram, double lambda)
    : requested_lambda_(lambda), effective_lambda_(lambda) {
  check_lambda(lambda);
  if (gram.rows() != gram.cols()) throw ArgumentError("Gram matrix must be square");
  if (!gram.allFinite()) throw NumericError("Gram matrix contains non-finite values");
  const Matrix sym = 0.5 * (gram + gram.transpose());
  Matrix system = sym;
  for (;;) {
    system.diagonal() = sym.diagonal().array() + effective_lambda_;
    llt_.compute(system);
    if (llt_.info() == Eigen::Success) return;
    if (escalations_ == kMaxEscalations) break;
    ++escalations_;
    effective_lambda_ *= 10.0;
  }
  const double cond = condition_estimate(system);
  std::ostringstream msg;
  msg << "Cholesky factorization failed at lambda=" << effective_lambda_
      << " after " << kMaxEscalations << " escalations (condition estimate " << cond << ")";
  throw NumericError(msg.str(), cond);
}

std::optional<std::string> regularization_warning(const Matrix& gram, double lambda) {
  const double scale = gram.norm() / std::sqrt(static_cast<double>(gram.rows()));
  if (lambda >= 0.1 * scale) {
    std::ostringstream msg;
    msg << "lambda=" << lambda << " is not negligible against the Gram matrix (0.1*||G||_F/sqrt(P)="
        << 0.1 * scale << "); the z-test approximation ignores the regularizer";
    return msg.str();
  }
  return std::nullopt;
}

Matrix kls_gram(const BasisKernel& k) { return k.values * k.values.transpose(); }

Matrix hkls_gram(const BasisKernel& k, const WeightedBasisKernel& k_psi) {
  if (k_psi.values.rows() != k.values.rows() || k_psi.values.cols() != k.values.cols()) {
    throw ArgumentError("weighted kernel shape does not match basis kernel");
  }
  return k_psi.values * k.values.transpose();
}

Vector fit_kls(const BasisKernel& k, const Vector& y, double lambda) {
  check_outcome(k, y);
  const RegularizedSolver solver(kls_gram(k), lambda);
  return solver.solve(Vector(k.values * y));
}

Vector fit_hkls(const BasisKernel& k, const WeightedBasisKernel& k_psi, const Vector& y,
                double lambda) {
  check_outcome(k, y);
  const Vector kls = fit_kls(k, y, lambda);
  const RegularizedSolver solver(hkls_gram(k, k_psi), lambda);
  return kls + hkls_offset(k, k_psi, y - k.values.transpose() * kls, solver);
}

Vector hkls_offset(const BasisKernel& k, const WeightedBasisKernel& k_psi, const Vector& residual,
                   const RegularizedSolver& hkls) {
  if (residual.size() != k.samples() || k_psi.squared_norms.size() != k.samples()) {
    throw ArgumentError("residual length does not match kernel columns");
  }
  const Vector weighted = (k_psi.squared_norms.array() - 1.0) * residual.array();
  return hkls.solve(Vector(k.values * weighted));
}

double residual_variance(const BasisKernel& k, const Vector& alpha, const Vector& y) {
  if (alpha.size() != k.basis_size()) throw ArgumentError("coefficient length does not match P");
  check_outcome(k, y);
  const Vector residual = y - k.values.transpose() * alpha;
  return residual.squaredNorm() / static_cast<double>(y.size());
}

}  // namespace krcd
