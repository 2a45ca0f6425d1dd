#include <cmath>

#include "doctest.h"
#include "krcd/confounder_test.hpp"
#include "krcd/datagen.hpp"
#include "krcd/error.hpp"
#include "support.hpp"

using namespace krcd;

namespace {

ObservedData unit_norm_data(Eigen::Index n, unsigned seed) {
  const RowMatrix z = testing::unit_norm_rows(testing::uniform_rows(n, 3, seed, 0.1, 1.0));
  ObservedData d;
  d.t = z.col(0);
  d.x = z.rightCols(2);
  d.y = testing::uniform_vector(n, seed + 1);
  return d;
}

ObservedData scenario_data(double rho, unsigned seed, Eigen::Index n = 300) {
  ScenarioConfig cfg;
  cfg.rho = rho;
  cfg.samples = n;
  cfg.seed = seed;
  return generate(cfg).observed();
}

RidgeConfig small_config(Eigen::Index p = 10) {
  RidgeConfig cfg;
  cfg.basis_size = p;
  return cfg;
}

}  // namespace

TEST_CASE("difference_operator") {
  SUBCASE("identity weights give zero") {
    const DesignMatrix z(testing::unit_norm_rows(testing::uniform_rows(20, 3, 2, 0.1, 1.0)));
    const BasisKernel k = basis_kernel(KernelSpec::polynomial(), z, 5);
    CHECK(difference_operator(k, weighted_basis(k, z), 1e-6).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("V0 Y reproduces the refit difference") {
    const DesignMatrix z(testing::uniform_rows(40, 3, 4, -1.0, 1.0));
    const BasisKernel k = basis_kernel(KernelSpec::gaussian(0.8), z, 8);
    const WeightedBasisKernel w = weighted_basis(k, z);
    const double lambda = 1e-3;
    const Matrix v0 = difference_operator(k, w, lambda);
    for (unsigned s = 0; s < 20; ++s) {
      const Vector y = testing::uniform_vector(40, 100 + s, -3.0, 3.0);
      const Vector refit = fit_hkls(k, w, y, lambda) - fit_kls(k, y, lambda);
      CHECK((v0 * y - refit).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("P=1, N=2 by hand") {
    RowMatrix zm(2, 1);
    zm << 1.0, 2.0;
    const DesignMatrix z(zm);
    const BasisKernel k = basis_kernel(KernelSpec::linear(), z, 1);
    const Matrix v0 = difference_operator(k, weighted_basis(k, z), 0.5);
    // K = [1, 2], K_psi = [1, 8], K K^T = 5, K_psi K^T = 17
    CHECK(std::abs(v0(0, 0) - (1.0 / 17.5 - 1.0 / 5.5)) < 1e-12);
    CHECK(std::abs(v0(0, 1) - (8.0 / 17.5 - 2.0 / 5.5)) < 1e-12);
  }
}

TEST_CASE("covariance_matrix") {
  CHECK(covariance_matrix(Matrix::Zero(3, 10), 10).isZero(0.0));

  Matrix single = Matrix::Zero(3, 7);
  single(1, 4) = 0.25;
  const Matrix v = covariance_matrix(single, 7);
  Matrix expected = Matrix::Zero(3, 3);
  expected(1, 1) = 7 * 0.0625;
  CHECK(v == expected);

  const Matrix v0 = testing::uniform_rows(4, 30, 8, -1.0, 1.0);
  Matrix oracle = Matrix::Zero(4, 4);
  for (Eigen::Index j = 0; j < 30; ++j) oracle += v0.col(j) * v0.col(j).transpose();
  oracle *= 30.0;
  const Matrix got = covariance_matrix(v0, 30);
  CHECK((got - oracle).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(got == got.transpose());
  CHECK((got.diagonal().array() >= 0.0).all());
}

TEST_CASE("two_sided_normal_p") {
  CHECK(two_sided_normal_p(0.0) == 1.0);
  CHECK(std::abs(two_sided_normal_p(1.959963984540054) - 0.05) < 1e-12);
  CHECK(std::abs(two_sided_normal_p(-3.0) - 0.0026997960632601866) < 1e-12);
  CHECK(std::abs(two_sided_normal_p(1.0) - 0.31731050786291415) < 1e-12);
  CHECK(two_sided_normal_p(50.0) == 1e-300);
}

TEST_CASE("z_and_p") {
  SUBCASE("zero delta") {
    const ZTest t = z_and_p(Vector::Zero(3), 0.7, Matrix::Identity(3, 3), 50);
    CHECK((t.p_values.array() == 1.0).all());
    CHECK(t.z_scores.isZero(0.0));
  }
  SUBCASE("standard normal quantile") {
    Vector delta(1);
    delta << 1.959964;
    const ZTest t = z_and_p(delta, 1.0, Matrix::Identity(1, 1), 1);
    CHECK(t.z_scores(0) == doctest::Approx(1.959964));
    CHECK(std::abs(t.p_values(0) - 0.05) < 1e-4);
  }
  SUBCASE("formula") {
    Vector delta(2);
    delta << 0.3, -0.1;
    Matrix v(2, 2);
    v << 2.0, 0.5, 0.5, 0.8;
    const ZTest t = z_and_p(delta, 0.25, v, 100);
    CHECK(t.z_scores(0) == doctest::Approx(10.0 * 0.3 / std::sqrt(0.5)));
    CHECK(t.z_scores(1) == doctest::Approx(-10.0 * 0.1 / std::sqrt(0.2)));
    CHECK(t.p_values(1) == doctest::Approx(std::erfc(std::abs(t.z_scores(1)) / std::sqrt(2.0))));
  }
  SUBCASE("tiny and slightly negative variances are degenerate") {
    Vector delta(3);
    delta << 1e-9, 0.2, 0.0;
    Matrix v = Matrix::Zero(3, 3);
    v(0, 0) = 1e-20;
    v(1, 1) = 1.0;
    v(2, 2) = -1e-13;
    const ZTest t = z_and_p(delta, 1.0, v, 10);
    CHECK(t.degenerate == std::vector<bool>{true, false, true});
    CHECK(t.p_values(0) == 1.0);
    CHECK(t.z_scores(2) == 0.0);
  }
  SUBCASE("tolerance") {
    Vector delta(2);
    delta << 0.5, -2.0;
    CHECK(degenerate_variance_tolerance(delta, 100) == doctest::Approx(1e-14 * 400.0));
    CHECK(degenerate_variance_tolerance(Vector::Zero(2), 100) == 1e-14);
  }
}

TEST_CASE("bonferroni_verdict") {
  const BonferroniDecision none = bonferroni_verdict(Vector::Constant(10, 0.01), 0.05);
  CHECK(none.threshold == doctest::Approx(0.005));
  CHECK(none.verdict == Verdict::support_null);

  Vector one = Vector::Constant(10, 0.5);
  one(3) = 0.001;
  const BonferroniDecision d = bonferroni_verdict(one, 0.05);
  CHECK(d.verdict == Verdict::reject_null);
  CHECK(d.rejected[3]);

  CHECK(bonferroni_verdict(Vector::Constant(1, 0.049), 0.05).verdict == Verdict::reject_null);
  CHECK(bonferroni_verdict(Vector::Constant(1, 0.05), 0.05).verdict == Verdict::support_null);
  CHECK_THROWS_AS(bonferroni_verdict(one, 0.0), ConfigurationError);
  CHECK_THROWS_AS(bonferroni_verdict(one, 1.0), ConfigurationError);
}

TEST_CASE("detect result invariants") {
  for (double rho : {0.0, 0.5, 2.0}) {
    for (unsigned seed = 1; seed <= 3; ++seed) {
      const TestResult r = detect(scenario_data(rho, seed), small_config(), 0.05);
      const double threshold = 0.05 / 10.0;
      bool any = false;
      for (std::size_t j = 0; j < 10; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        CHECK(r.p_values(jj) >= 0.0);
        CHECK(r.p_values(jj) <= 1.0);
        if (r.rejected_coords[j]) CHECK(r.p_values(jj) < threshold);
        if (r.degenerate_coords[j]) {
          CHECK(r.p_values(jj) == 1.0);
          CHECK(!r.rejected_coords[j]);
        }
        any = any || r.rejected_coords[j];
      }
      CHECK((r.verdict == Verdict::reject_null) == any);
      CHECK(r.sigma_sq >= 0.0);
      CHECK((r.coefficients.delta - (r.coefficients.alpha_hkls - r.coefficients.alpha_kls)).cwiseAbs().maxCoeff() <=
            1e-12 * std::max(1.0, r.coefficients.alpha_hkls.cwiseAbs().maxCoeff()));
      CHECK(r.coefficients.delta.allFinite());
    }
  }
}

TEST_CASE("detect degenerate input") {
  const TestResult r = detect(unit_norm_data(60, 3), small_config(8), 0.05);
  CHECK(r.coefficients.delta.cwiseAbs().maxCoeff() < 1e-10);
  CHECK((r.p_values.array() == 1.0).all());
  CHECK(r.verdict == Verdict::support_null);
  CHECK(r.score() == 0.0);
}

TEST_CASE("detect is invariant to outcome scale") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    ObservedData d = scenario_data(1.0, seed);
    const TestResult base = detect(d, small_config(), 0.05);
    for (double c : {10.0, -3.0, 0.01}) {
      ObservedData scaled = d;
      scaled.y *= c;
      const TestResult r = detect(scaled, small_config(), 0.05);
      CHECK(r.verdict == base.verdict);
      for (Eigen::Index j = 0; j < 10; ++j) {
        const double expected = c > 0 ? base.z_scores(j) : -base.z_scores(j);
        CHECK(std::abs(r.z_scores(j) - expected) <= 1e-8 * std::max(1.0, std::abs(expected)));
      }
    }
  }
}

TEST_CASE("detect construction modes agree") {
  const ObservedData d = scenario_data(1.0, 9);
  RidgeConfig cfg = small_config();
  const TestResult full = detect(d, cfg, 0.05);
  cfg.construction = GramConstruction::basis_rows;
  const TestResult rows = detect(d, cfg, 0.05);
  CHECK(full.z_scores == rows.z_scores);
  CHECK(full.sigma_sq == rows.sigma_sq);
}

TEST_CASE("detect is deterministic") {
  const ObservedData d = scenario_data(0.5, 4);
  RidgeConfig cfg = small_config();
  cfg.kernel = KernelSpec::gaussian();
  cfg.selection = BasisSelection::seeded_random;
  cfg.seed = 17;
  const TestResult a = detect(d, cfg, 0.05);
  const TestResult b = detect(d, cfg, 0.05);
  CHECK(a.z_scores == b.z_scores);
  CHECK(a.kernel.bandwidth == b.kernel.bandwidth);
  CHECK(a.kernel.bandwidth.has_value());
}

TEST_CASE("detect errors and warnings") {
  const ObservedData d = scenario_data(0.0, 1, 50);
  CHECK_THROWS_AS(detect(d, small_config(50), 0.05), ConfigurationError);
  CHECK_THROWS_AS(detect(d, small_config(80), 0.05), ConfigurationError);
  CHECK_THROWS_AS(detect(d, small_config(), 1.5), ConfigurationError);

  ObservedData bad = d;
  bad.y(3) = std::nan("");
  CHECK_THROWS_AS(detect(bad, small_config(), 0.05), InputError);
  ObservedData ragged = d;
  ragged.t.conservativeResize(49);
  CHECK_THROWS_AS(detect(ragged, small_config(), 0.05), InputError);

  RidgeConfig heavy = small_config();
  heavy.lambda = 1e6;
  CHECK(!detect(d, heavy, 0.05).warnings.empty());
  CHECK(detect(d, small_config(), 0.05).warnings.empty());
}
