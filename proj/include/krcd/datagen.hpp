#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "krcd/confounder_test.hpp"
#include "krcd/kernel.hpp"

namespace krcd {

enum class Scenario { single_env_nonlinear, multi_env_nonlinear, binary_synthetic };

std::string to_string(Scenario scenario);
/// Accepts the long names and the short CLI forms (single_env, multi_env, binary).
Scenario scenario_from_string(const std::string& name);

struct ScenarioConfig {
  Scenario scenario = Scenario::single_env_nonlinear;
  double rho = 0.0;  // confounding strength; 0 means no hidden confounding
  Eigen::Index samples = 1000;
  Eigen::Index dx = 3;
  Eigen::Index du = 3;
  Eigen::Index n_envs = 2;
  std::uint64_t seed = 0;
  double noise_half_width = 0.1;

  void validate() const;
};

struct GeneratedDataset {
  Matrix x;
  Matrix u;  // hidden; kept for audit only
  Vector t;
  Vector y;
  std::vector<int> env_labels;  // multi_env only
  Vector t_latent, y_latent;    // binary_synthetic only: T0, Y0 before thresholding
  bool truth = false;           // rho > 0

  /// The columns a detector is allowed to see.
  ObservedData observed(bool append_env_column = false) const;
};

/// Per-column min-max scaling to [0, 1] followed by mean centering.
/// Constant columns map to zeros.
Matrix normalize_covariates(const Matrix& m);

GeneratedDataset gen_single_env(const ScenarioConfig& config);
GeneratedDataset gen_multi_env(const ScenarioConfig& config);
GeneratedDataset gen_binary_synthetic(const ScenarioConfig& config);

/// Dispatches on config.scenario.
GeneratedDataset generate(const ScenarioConfig& config);

/// Per-environment structural weights of the multi-environment scenario.
struct EnvironmentWeights {
  Vector t_x, t_u, y_x, y_u;  // Uniform(1, 5)
  double y_t = 1.0;           // Uniform(1, 2)
};

EnvironmentWeights environment_weights(const ScenarioConfig& config, int env);

/// Noise-free structural parts of T and Y for each row, recomputed from X, U
/// (and T for the outcome). Used for audits of generated data. For
/// binary_synthetic these are the latent T0 / Y0 parts.
struct StructuralParts {
  Vector t;
  Vector y;
};

StructuralParts structural_parts(const ScenarioConfig& config, const GeneratedDataset& data);

}  // namespace krcd
