#include "krcd/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "krcd/error.hpp"
#include "krcd/parallel.hpp"
#include "krcd/random.hpp"

namespace krcd {

namespace {

constexpr std::size_t kBandwidthSubsample = 1000;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return s;
}

double int_pow(double base, int exponent) {
  double result = 1.0;
  for (int e = 0; e < exponent; ++e) result *= base;
  return result;
}

// Unchecked evaluation; callers validate the spec once up front.
double evaluate(const KernelSpec& spec, std::span<const double> z1, std::span<const double> z2) {
  switch (spec.family) {
    case KernelFamily::linear:
      return dot(z1, z2);
    case KernelFamily::polynomial:
      return int_pow(dot(z1, z2) + spec.offset, spec.degree);
    case KernelFamily::gaussian: {
      const double h = *spec.bandwidth;
      return std::exp(-squared_distance(z1, z2) / (2.0 * h * h));
    }
  }
  return 0.0;
}

void require_resolved(const KernelSpec& spec) {
  spec.validate();
  if (!spec.resolved()) {
    throw ConfigurationError("gaussian bandwidth must be resolved before evaluation");
  }
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericError(std::string("non-finite kernel value in ") + what);
  }
}

}  // namespace

void KernelSpec::validate() const {
  if (family == KernelFamily::polynomial) {
    if (degree < 1) throw ConfigurationError("polynomial degree must be >= 1");
    if (!(offset >= 0.0) || !std::isfinite(offset)) {
      throw ConfigurationError("polynomial offset must be finite and >= 0");
    }
  }
  if (family == KernelFamily::gaussian && bandwidth) {
    if (!(*bandwidth > 0.0) || !std::isfinite(*bandwidth)) {
      throw ConfigurationError("gaussian bandwidth must be finite and > 0");
    }
  }
}

std::string KernelSpec::describe() const {
  std::ostringstream out;
  out << to_string(family);
  switch (family) {
    case KernelFamily::linear:
      break;
    case KernelFamily::polynomial:
      out << "(degree=" << degree << ",offset=" << offset << ")";
      break;
    case KernelFamily::gaussian:
      out << "(bandwidth=";
      if (bandwidth) {
        out.precision(17);
        out << *bandwidth;
      } else {
        out << "median";
      }
      out << ")";
      break;
  }
  return out.str();
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::linear:
      return "linear";
    case KernelFamily::polynomial:
      return "polynomial";
    case KernelFamily::gaussian:
      return "gaussian";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "linear") return KernelFamily::linear;
  if (name == "poly" || name == "polynomial") return KernelFamily::polynomial;
  if (name == "gaussian" || name == "rbf") return KernelFamily::gaussian;
  throw ArgumentError("unknown kernel family: " + name);
}

DesignMatrix::DesignMatrix(RowMatrix z) : z_(std::move(z)) {
  if (z_.rows() < 2) throw InputError("design matrix needs at least 2 rows");
  if (z_.cols() < 1) throw InputError("design matrix needs at least 1 column");
  if (!z_.allFinite()) throw InputError("design matrix contains non-finite entries");
}

DesignMatrix DesignMatrix::from_treatment(const Vector& treatment, const Matrix& covariates) {
  if (treatment.size() != covariates.rows()) {
    throw ArgumentError("treatment and covariates have different row counts");
  }
  RowMatrix z(covariates.rows(), covariates.cols() + 1);
  z.col(0) = treatment;
  z.rightCols(covariates.cols()) = covariates;
  return DesignMatrix(std::move(z));
}

Vector DesignMatrix::squared_norms() const { return z_.rowwise().squaredNorm(); }

double kernel_eval(const KernelSpec& spec, std::span<const double> z1,
                   std::span<const double> z2) {
  if (z1.size() != z2.size()) throw ArgumentError("kernel arguments differ in length");
  require_resolved(spec);
  const double value = evaluate(spec, z1, z2);
  if (!std::isfinite(value)) throw NumericError("kernel evaluation is not finite");
  return value;
}

double resolve_bandwidth(const DesignMatrix& z, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(z.samples());
  std::vector<std::size_t> rows;
  if (n > kBandwidthSubsample) {
    rows = sample_without_replacement(n, kBandwidthSubsample, seed);
  } else {
    rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  }
  std::vector<double> dists;
  dists.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      const auto ia = static_cast<Eigen::Index>(rows[a]);
      const auto ib = static_cast<Eigen::Index>(rows[b]);
      dists.push_back(std::sqrt(squared_distance(z.row(ia), z.row(ib))));
    }
  }
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  double median = dists[mid];
  if (dists.size() % 2 == 0) {
    const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  if (!(median > 0.0) || !std::isfinite(median)) return 1.0;
  return median;
}

KernelSpec resolve_kernel(const KernelSpec& spec, const DesignMatrix& z, std::uint64_t seed) {
  spec.validate();
  KernelSpec out = spec;
  if (!out.resolved()) out.bandwidth = resolve_bandwidth(z, seed);
  return out;
}

std::vector<Eigen::Index> select_basis_rows(Eigen::Index samples, Eigen::Index basis_size,
                                            BasisSelection selection, std::uint64_t seed) {
  if (basis_size < 1 || basis_size >= samples) {
    throw ConfigurationError("basis size P must satisfy 1 <= P < N (P=" +
                             std::to_string(basis_size) + ", N=" + std::to_string(samples) + ")");
  }
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(basis_size));
  if (selection == BasisSelection::first_p) {
    for (Eigen::Index i = 0; i < basis_size; ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
  }
  const auto drawn = sample_without_replacement(static_cast<std::size_t>(samples),
                                                static_cast<std::size_t>(basis_size), seed);
  for (std::size_t i = 0; i < drawn.size(); ++i) rows[i] = static_cast<Eigen::Index>(drawn[i]);
  return rows;
}

Matrix full_kernel(const KernelSpec& spec, const DesignMatrix& z) {
  require_resolved(spec);
  const Eigen::Index n = z.samples();
  Matrix gram(n, n);
  // Upper triangle by columns (contiguous in column-major storage), then mirrored.
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (auto j = static_cast<Eigen::Index>(begin); j < static_cast<Eigen::Index>(end); ++j) {
      const auto zj = z.row(j);
      for (Eigen::Index i = 0; i <= j; ++i) gram(i, j) = evaluate(spec, z.row(i), zj);
    }
  });
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) gram(i, j) = gram(j, i);
  }
  check_finite(gram, "full kernel");
  return gram;
}

BasisKernel basis_kernel(const KernelSpec& spec, const DesignMatrix& z, Eigen::Index basis_size,
                         BasisSelection selection, std::uint64_t seed) {
  require_resolved(spec);
  const Eigen::Index n = z.samples();
  BasisKernel out;
  out.row_indices = select_basis_rows(n, basis_size, selection, seed);
  out.values.resize(basis_size, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (auto j = static_cast<Eigen::Index>(begin); j < static_cast<Eigen::Index>(end); ++j) {
      const auto zj = z.row(j);
      for (Eigen::Index i = 0; i < basis_size; ++i) {
        // Argument order matches full_kernel's upper triangle so both routes agree bitwise.
        const Eigen::Index b = out.row_indices[static_cast<std::size_t>(i)];
        out.values(i, j) = b <= j ? evaluate(spec, z.row(b), zj) : evaluate(spec, zj, z.row(b));
      }
    }
  });
  check_finite(out.values, "basis kernel");
  return out;
}

BasisKernel basis_from_gram(const Matrix& gram, Eigen::Index basis_size, BasisSelection selection,
                            std::uint64_t seed) {
  if (gram.rows() != gram.cols()) throw ArgumentError("Gram matrix must be square");
  BasisKernel out;
  out.row_indices = select_basis_rows(gram.rows(), basis_size, selection, seed);
  out.values.resize(basis_size, gram.cols());
  for (Eigen::Index i = 0; i < basis_size; ++i) {
    out.values.row(i) = gram.row(out.row_indices[static_cast<std::size_t>(i)]);
  }
  return out;
}

WeightedBasisKernel weighted_basis(const BasisKernel& k, const DesignMatrix& z) {
  if (k.samples() != z.samples()) {
    throw ArgumentError("basis kernel column count does not match sample count");
  }
  WeightedBasisKernel out;
  out.squared_norms = z.squared_norms();
  out.values = k.values * out.squared_norms.asDiagonal();
  return out;
}

}  // namespace krcd
