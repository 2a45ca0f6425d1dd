#pragma once

#include <cstdint>
#include <functional>

#include "krcd/confounder_test.hpp"
#include "krcd/datagen.hpp"
#include "krcd/estimator.hpp"

namespace krcd {

// Reference minimizers that never touch a linear solver: plain gradient
// descent on the empirical ridge objective. They exist to check the closed
// forms, so keep them independent of estimator.cpp.

struct OracleOptions {
  double tol = 1e-10;  // gradient-norm stopping threshold
  long max_iterations = 1'000'000;
};

struct OracleSolution {
  Vector alpha;
  long iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

/// (1/N) sum_i w_i (Y_i - (K^T alpha)_i)^2 + (lambda/N) ||alpha||^2.
/// An empty weight vector means unit weights.
double ridge_objective(const BasisKernel& k, const Vector& y, const Vector& weights,
                       const Vector& alpha, double lambda);

OracleSolution oracle_minimize_kls(const BasisKernel& k, const Vector& y, double lambda,
                                   const OracleOptions& options = {});

/// Same objective with the squared residual of sample i weighted by squared_norms[i].
OracleSolution oracle_minimize_hkls(const BasisKernel& k, const Vector& y,
                                    const Vector& squared_norms, double lambda,
                                    const OracleOptions& options = {});

struct OracleReport {
  double max_coord_error = 0.0;
  double objective_gap = 0.0;  // oracle objective minus closed-form objective (worst case)
  long iterations = 0;         // max over instances
  bool converged = true;
  int instances = 0;
};

/// Oracle-vs-closed-form agreement over `instances` random problems per
/// kernel family (N=30, P=6 by default), both KLS and HKLS.
OracleReport oracle_agreement_suite(int instances = 20, std::uint64_t seed = 0,
                                    Eigen::Index samples = 30, Eigen::Index basis_size = 6,
                                    double lambda = 0.1);

struct CalibrationReport {
  double rejection_rate = 0.0;
  double z_mean = 0.0;
  double z_var = 0.0;
  double ks_distance = 0.0;
  int repeats = 0;
  long pooled_z = 0;  // number of non-degenerate z-scores pooled
};

/// Kolmogorov-Smirnov distance between the empirical CDF of `values` and Phi.
double ks_distance_to_normal(std::vector<double> values);

/// Runs detect on `repeats` independently seeded datasets drawn by `draw(seed)`.
CalibrationReport monte_carlo_null_calibration(
    const RidgeConfig& config, const std::function<ObservedData(std::uint64_t)>& draw,
    int repeats, std::uint64_t base_seed = 0, double alpha_level = 0.05);

/// Scenario form; the scenario must have rho = 0. Seeds are scenario.seed + r.
CalibrationReport monte_carlo_null_calibration(const RidgeConfig& config,
                                               const ScenarioConfig& scenario, int repeats,
                                               double alpha_level = 0.05);

}  // namespace krcd
