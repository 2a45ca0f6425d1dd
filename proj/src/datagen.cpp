#include "krcd/datagen.hpp"

#include <cmath>

#include "krcd/error.hpp"
#include "krcd/random.hpp"

namespace krcd {

namespace {

enum Stream : std::uint64_t {
  kCovariates = 1,
  kHidden = 2,
  kTreatmentNoise = 3,
  kOutcomeNoise = 4,
  kEnvironmentWeights = 5,
};

Matrix uniform_matrix(const ScenarioConfig& config, Stream stream, Eigen::Index cols) {
  const CounterRng rng(config.seed, stream);
  Matrix m(config.samples, cols);
  for (Eigen::Index i = 0; i < config.samples; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = rng.uniform(static_cast<std::uint64_t>(i * cols + c));
    }
  }
  return m;
}

Vector noise(const ScenarioConfig& config, Stream stream) {
  const CounterRng rng(config.seed, stream);
  const double h = config.noise_half_width;
  Vector e(config.samples);
  for (Eigen::Index i = 0; i < config.samples; ++i) {
    e(i) = rng.uniform(static_cast<std::uint64_t>(i), -h, h);
  }
  return e;
}

void require_scenario(const ScenarioConfig& config, Scenario expected) {
  config.validate();
  if (config.scenario != expected) {
    throw ConfigurationError("scenario mismatch: expected " + to_string(expected) + ", got " +
                             to_string(config.scenario));
  }
}

// Single-environment structural parts: ||X||^2 + rho ||U||^2, then ||Z||^2 + rho ||U||^2.
Vector single_env_treatment(double rho, const Matrix& x, const Matrix& u) {
  return x.rowwise().squaredNorm() + rho * u.rowwise().squaredNorm();
}

Vector single_env_outcome(double rho, const Vector& t, const Matrix& x, const Matrix& u) {
  return t.array().square().matrix() + x.rowwise().squaredNorm() +
         rho * u.rowwise().squaredNorm();
}

double multi_env_treatment(const EnvironmentWeights& w, double rho, const Eigen::RowVectorXd& x,
                           const Eigen::RowVectorXd& u) {
  const Eigen::RowVectorXd scaled = 3.0 * rho * u;
  return x.array().square().matrix().dot(w.t_x) + scaled.array().square().matrix().dot(w.t_u);
}

double multi_env_outcome(const EnvironmentWeights& w, double rho, double t,
                         const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& u) {
  const Eigen::RowVectorXd scaled = 3.0 * rho * u;
  return w.y_t * t * t + x.array().square().matrix().dot(w.y_x) +
         scaled.array().square().matrix().dot(w.y_u);
}

}  // namespace

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::single_env_nonlinear:
      return "single_env_nonlinear";
    case Scenario::multi_env_nonlinear:
      return "multi_env_nonlinear";
    case Scenario::binary_synthetic:
      return "binary_synthetic";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "single_env" || name == "single_env_nonlinear") return Scenario::single_env_nonlinear;
  if (name == "multi_env" || name == "multi_env_nonlinear") return Scenario::multi_env_nonlinear;
  if (name == "binary" || name == "binary_synthetic") return Scenario::binary_synthetic;
  throw ArgumentError("unknown scenario: " + name);
}

void ScenarioConfig::validate() const {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigurationError("rho must be finite and >= 0");
  if (samples < 2) throw ConfigurationError("sample count must be >= 2");
  if (dx < 1 || du < 1) throw ConfigurationError("covariate and hidden dimensions must be >= 1");
  if (!(noise_half_width >= 0.0) || !std::isfinite(noise_half_width)) {
    throw ConfigurationError("noise half-width must be finite and >= 0");
  }
  if (scenario == Scenario::multi_env_nonlinear) {
    if (n_envs < 2) throw ConfigurationError("multi-environment scenario needs at least 2 environments");
    if (n_envs > samples) throw ConfigurationError("more environments than samples");
  }
  if (scenario == Scenario::binary_synthetic && (dx != 1 || du != 1)) {
    throw ConfigurationError("binary scenario requires dx = du = 1");
  }
}

ObservedData GeneratedDataset::observed(bool append_env_column) const {
  ObservedData out;
  out.t = t;
  out.y = y;
  if (append_env_column && !env_labels.empty()) {
    out.x.resize(x.rows(), x.cols() + 1);
    out.x.leftCols(x.cols()) = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out.x(i, x.cols()) = env_labels[static_cast<std::size_t>(i)];
    }
  } else {
    out.x = x;
  }
  return out;
}

Matrix normalize_covariates(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double lo = m.col(c).minCoeff();
    const double hi = m.col(c).maxCoeff();
    if (!(hi > lo)) {
      out.col(c).setZero();
      continue;
    }
    out.col(c) = (m.col(c).array() - lo) / (hi - lo);
    out.col(c).array() -= out.col(c).mean();
  }
  return out;
}

GeneratedDataset gen_single_env(const ScenarioConfig& config) {
  require_scenario(config, Scenario::single_env_nonlinear);
  GeneratedDataset d;
  d.x = normalize_covariates(uniform_matrix(config, kCovariates, config.dx));
  d.u = normalize_covariates(uniform_matrix(config, kHidden, config.du));
  d.t = single_env_treatment(config.rho, d.x, d.u) + noise(config, kTreatmentNoise);
  d.y = single_env_outcome(config.rho, d.t, d.x, d.u) + noise(config, kOutcomeNoise);
  d.truth = config.rho > 0.0;
  return d;
}

EnvironmentWeights environment_weights(const ScenarioConfig& config, int env) {
  const CounterRng rng(config.seed, kEnvironmentWeights);
  const auto dx = static_cast<std::uint64_t>(config.dx);
  const auto du = static_cast<std::uint64_t>(config.du);
  const std::uint64_t per_env = 2 * dx + 2 * du + 1;
  std::uint64_t counter = static_cast<std::uint64_t>(env) * per_env;
  auto draw = [&](Eigen::Index len, double lo, double hi) {
    Vector v(len);
    for (Eigen::Index i = 0; i < len; ++i) v(i) = rng.uniform(counter++, lo, hi);
    return v;
  };
  EnvironmentWeights w;
  w.t_x = draw(config.dx, 1.0, 5.0);
  w.t_u = draw(config.du, 1.0, 5.0);
  w.y_x = draw(config.dx, 1.0, 5.0);
  w.y_u = draw(config.du, 1.0, 5.0);
  w.y_t = rng.uniform(counter++, 1.0, 2.0);
  return w;
}

GeneratedDataset gen_multi_env(const ScenarioConfig& config) {
  require_scenario(config, Scenario::multi_env_nonlinear);
  GeneratedDataset d;
  d.x = normalize_covariates(uniform_matrix(config, kCovariates, config.dx));
  d.u = normalize_covariates(uniform_matrix(config, kHidden, config.du));
  const Vector e1 = noise(config, kTreatmentNoise);
  const Vector e2 = noise(config, kOutcomeNoise);

  std::vector<EnvironmentWeights> weights;
  for (int e = 0; e < config.n_envs; ++e) weights.push_back(environment_weights(config, e));

  d.t.resize(config.samples);
  d.y.resize(config.samples);
  d.env_labels.resize(static_cast<std::size_t>(config.samples));
  for (Eigen::Index i = 0; i < config.samples; ++i) {
    const int env = static_cast<int>(i % config.n_envs);
    const auto& w = weights[static_cast<std::size_t>(env)];
    d.env_labels[static_cast<std::size_t>(i)] = env;
    d.t(i) = multi_env_treatment(w, config.rho, d.x.row(i), d.u.row(i)) + e1(i);
    d.y(i) = multi_env_outcome(w, config.rho, d.t(i), d.x.row(i), d.u.row(i)) + e2(i);
  }
  d.truth = config.rho > 0.0;
  return d;
}

GeneratedDataset gen_binary_synthetic(const ScenarioConfig& config) {
  require_scenario(config, Scenario::binary_synthetic);
  GeneratedDataset d;
  d.x = uniform_matrix(config, kCovariates, 1);
  d.u = uniform_matrix(config, kHidden, 1);
  const Vector x2 = d.x.col(0).array().square();
  const Vector u2 = d.u.col(0).array().square();
  d.t_latent = x2 + 2.5 * config.rho * u2 + noise(config, kTreatmentNoise);
  d.t = (d.t_latent.array() > 1.0).cast<double>();
  d.y_latent = d.t.array().square().matrix() + x2 + 2.5 * config.rho * u2 +
               noise(config, kOutcomeNoise);
  d.y = (d.y_latent.array() > 1.0).cast<double>();
  d.truth = config.rho > 0.0;
  return d;
}

GeneratedDataset generate(const ScenarioConfig& config) {
  switch (config.scenario) {
    case Scenario::single_env_nonlinear:
      return gen_single_env(config);
    case Scenario::multi_env_nonlinear:
      return gen_multi_env(config);
    case Scenario::binary_synthetic:
      return gen_binary_synthetic(config);
  }
  throw ConfigurationError("unknown scenario");
}

StructuralParts structural_parts(const ScenarioConfig& config, const GeneratedDataset& data) {
  StructuralParts parts;
  switch (config.scenario) {
    case Scenario::single_env_nonlinear:
      parts.t = single_env_treatment(config.rho, data.x, data.u);
      parts.y = single_env_outcome(config.rho, data.t, data.x, data.u);
      break;
    case Scenario::multi_env_nonlinear: {
      parts.t.resize(data.t.size());
      parts.y.resize(data.y.size());
      for (Eigen::Index i = 0; i < data.t.size(); ++i) {
        const auto w = environment_weights(config, data.env_labels[static_cast<std::size_t>(i)]);
        parts.t(i) = multi_env_treatment(w, config.rho, data.x.row(i), data.u.row(i));
        parts.y(i) = multi_env_outcome(w, config.rho, data.t(i), data.x.row(i), data.u.row(i));
      }
      break;
    }
    case Scenario::binary_synthetic: {
      const Vector x2 = data.x.col(0).array().square();
      const Vector u2 = data.u.col(0).array().square();
      parts.t = x2 + 2.5 * config.rho * u2;
      parts.y = data.t.array().square().matrix() + x2 + 2.5 * config.rho * u2;
      break;
    }
  }
  return parts;
}

}  // namespace krcd
