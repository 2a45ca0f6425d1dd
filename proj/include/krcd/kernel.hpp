#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace krcd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class KernelFamily { linear, polynomial, gaussian };

/// Kernel family plus hyperparameters. An empty `bandwidth` on a gaussian
/// kernel means "resolve with the median heuristic".
struct KernelSpec {
  KernelFamily family = KernelFamily::polynomial;
  int degree = 2;
  double offset = 1.0;
  std::optional<double> bandwidth;

  static KernelSpec linear() { return {KernelFamily::linear, 1, 0.0, std::nullopt}; }
  static KernelSpec polynomial(int degree = 2, double offset = 1.0) {
    return {KernelFamily::polynomial, degree, offset, std::nullopt};
  }
  static KernelSpec gaussian(std::optional<double> bandwidth = std::nullopt) {
    return {KernelFamily::gaussian, 1, 0.0, bandwidth};
  }

  bool resolved() const { return family != KernelFamily::gaussian || bandwidth.has_value(); }

  /// Throws ConfigurationError when a hyperparameter is out of range.
  void validate() const;

  /// e.g. "polynomial(degree=2,offset=1)" or "gaussian(bandwidth=median)".
  std::string describe() const;
};

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Samples stacked as rows; column 0 is the treatment, the rest covariates.
class DesignMatrix {
 public:
  /// Validates finiteness and N >= 2.
  explicit DesignMatrix(RowMatrix z);

  /// Z = [T, X].
  static DesignMatrix from_treatment(const Vector& treatment, const Matrix& covariates);

  Eigen::Index samples() const { return z_.rows(); }
  Eigen::Index covariate_dim() const { return z_.cols() - 1; }
  Eigen::Index cols() const { return z_.cols(); }

  std::span<const double> row(Eigen::Index i) const {
    return {z_.data() + i * z_.cols(), static_cast<std::size_t>(z_.cols())};
  }
  const RowMatrix& values() const { return z_; }

  /// ||Z_j||^2 for every row.
  Vector squared_norms() const;

 private:
  RowMatrix z_;
};

enum class BasisSelection { first_p, seeded_random };

/// P x N block of kernel rows; row i is k(Z_{row_indices[i]}, .) at every sample.
struct BasisKernel {
  Matrix values;
  std::vector<Eigen::Index> row_indices;

  Eigen::Index basis_size() const { return values.rows(); }
  Eigen::Index samples() const { return values.cols(); }
};

/// K * diag(||Z_j||^2), plus the diagonal itself.
struct WeightedBasisKernel {
  Matrix values;
  Vector squared_norms;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> z1, std::span<const double> z2);

/// Median pairwise distance over at most 1000 seeded rows; 1.0 when the median is 0.
double resolve_bandwidth(const DesignMatrix& z, std::uint64_t seed = 0);

/// Fills in the median-heuristic bandwidth when needed.
KernelSpec resolve_kernel(const KernelSpec& spec, const DesignMatrix& z, std::uint64_t seed = 0);

/// Indices of the basis rows for a given selection mode.
std::vector<Eigen::Index> select_basis_rows(Eigen::Index samples, Eigen::Index basis_size,
                                            BasisSelection selection, std::uint64_t seed);

/// Full symmetric N x N Gram matrix.
Matrix full_kernel(const KernelSpec& spec, const DesignMatrix& z);

/// Evaluates only the P selected rows. Throws ConfigurationError unless 1 <= P < N.
BasisKernel basis_kernel(const KernelSpec& spec, const DesignMatrix& z, Eigen::Index basis_size,
                         BasisSelection selection = BasisSelection::first_p,
                         std::uint64_t seed = 0);

/// Row selection out of an already computed Gram matrix.
BasisKernel basis_from_gram(const Matrix& gram, Eigen::Index basis_size,
                            BasisSelection selection = BasisSelection::first_p,
                            std::uint64_t seed = 0);

WeightedBasisKernel weighted_basis(const BasisKernel& k, const DesignMatrix& z);

}  // namespace krcd
