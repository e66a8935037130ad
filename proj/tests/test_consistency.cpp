#include <cmath>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "uev/consistency.hpp"
#include "uev/errors.hpp"
#include "uev/model.hpp"

using namespace uev;

namespace {

const GaussianChain kLeft{{1.0, 1.0}, 0.3};

/// Two independent copies of the left configuration stacked into 2-D draws;
/// the evidence claims conditional covariance diag(q_var, q_var).
PairedDraws two_dim_draws(double q_var, std::size_t m, std::size_t k, std::size_t n_base,
                          std::uint64_t seed) {
  PairedDraws draws;
  RngStream rng(seed);
  const double sigma_zeta = std::sqrt(0.09);  // witness marginal spread per dim
  const double q_sd = std::sqrt(q_var);
  draws.zeta_draws.reserve(m);
  draws.y_draws_per_zeta.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double z1 = rng.normal(1.0, sigma_zeta);
    const double z2 = rng.normal(1.0, sigma_zeta);
    draws.zeta_draws.push_back({z1, z2});
    auto& group = draws.y_draws_per_zeta[i];
    group.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      group.push_back({rng.normal(z1, q_sd), rng.normal(z2, q_sd)});
    }
  }
  draws.base_y_draws.reserve(n_base);
  for (std::size_t i = 0; i < n_base; ++i) {
    const double x1 = rng.normal(1.0, 1.0);
    const double x2 = rng.normal(1.0, 1.0);
    draws.base_y_draws.push_back({rng.normal(x1, 0.3), rng.normal(x2, 0.3)});
  }
  return draws;
}

}  // namespace

TEST_CASE("scalar check passes on the consistent left configuration") {
  const PairedDraws draws = gaussian_paired_draws(kLeft, 1.0, 2000, 50, 100000, 61);
  const ScalarCheck check = check_total_variance_scalar(draws, 0);
  CHECK(check.var_y == doctest::Approx(1.09).epsilon(0.03));
  CHECK(check.expected_cond_var == doctest::Approx(1.0).epsilon(0.03));
  CHECK(check.verdict == Verdict::Pass);
  CHECK_FALSE(check.equality_flagged);
}

TEST_CASE("scalar check fails when the evidence claims too much conditional spread") {
  const PairedDraws draws = gaussian_paired_draws(kLeft, 2.0, 2000, 50, 100000, 62);
  const ScalarCheck check = check_total_variance_scalar(draws, 0);
  CHECK(check.var_y == doctest::Approx(1.09).epsilon(0.03));
  CHECK(check.expected_cond_var == doctest::Approx(4.0).epsilon(0.03));
  CHECK(check.verdict == Verdict::Fail);
}

TEST_CASE("equality case is inconclusive and flagged") {
  // Constant conditional variance matching the total variance, with a constant
  // conditional mean: var[y] = 2 and q(y|zeta) = N(0, 2) for every zeta.
  PairedDraws draws;
  RngStream rng(63);
  const std::size_t m = 3000, k = 50;
  draws.y_draws_per_zeta.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    draws.zeta_draws.push_back({rng.normal(0.0, 1.0)});
    for (std::size_t j = 0; j < k; ++j) {
      draws.y_draws_per_zeta[i].push_back({rng.normal(0.0, std::sqrt(2.0))});
    }
  }
  for (std::size_t i = 0; i < 100000; ++i) {
    const double x = rng.normal(0.0, 1.0);
    draws.base_y_draws.push_back({rng.normal(x, 1.0)});
  }
  const ScalarCheck check = check_total_variance_scalar(draws, 0);
  CHECK(check.verdict == Verdict::Inconclusive);
  CHECK(check.equality_flagged);
}

TEST_CASE("law of total variance closes on the inner draws") {
  const PairedDraws draws = gaussian_paired_draws(kLeft, 1.0, 4000, 50, 2, 64);
  // Pooled variance of all inner draws vs within + between decomposition.
  double pooled_mean = 0.0;
  std::size_t count = 0;
  for (const auto& group : draws.y_draws_per_zeta) {
    for (const auto& y : group) {
      pooled_mean += y[0];
      ++count;
    }
  }
  pooled_mean /= static_cast<double>(count);
  double pooled_var = 0.0;
  for (const auto& group : draws.y_draws_per_zeta) {
    for (const auto& y : group) {
      pooled_var += (y[0] - pooled_mean) * (y[0] - pooled_mean);
    }
  }
  pooled_var /= static_cast<double>(count);

  double within = 0.0, between = 0.0;
  for (const auto& group : draws.y_draws_per_zeta) {
    double gm = 0.0;
    for (const auto& y : group) gm += y[0];
    gm /= static_cast<double>(group.size());
    double gv = 0.0;
    for (const auto& y : group) gv += (y[0] - gm) * (y[0] - gm);
    within += gv / static_cast<double>(group.size());
    between += (gm - pooled_mean) * (gm - pooled_mean);
  }
  within /= static_cast<double>(draws.y_draws_per_zeta.size());
  between /= static_cast<double>(draws.y_draws_per_zeta.size());
  CHECK(pooled_var == doctest::Approx(within + between).epsilon(1e-9));
}

TEST_CASE("inflating the conditional spread never flips fail to pass") {
  PairedDraws draws = gaussian_paired_draws(kLeft, 2.0, 1000, 30, 50000, 65);
  REQUIRE(check_total_variance_scalar(draws, 0).verdict == Verdict::Fail);
  for (double c : {1.5, 4.0, 16.0}) {
    PairedDraws inflated = draws;
    const double root = std::sqrt(c);
    for (auto& group : inflated.y_draws_per_zeta) {
      double gm = 0.0;
      for (const auto& y : group) gm += y[0];
      gm /= static_cast<double>(group.size());
      for (auto& y : group) y[0] = gm + root * (y[0] - gm);
    }
    CHECK(check_total_variance_scalar(inflated, 0).verdict == Verdict::Fail);
  }
}

TEST_CASE("determinant check reduces to the scalar check in one dimension") {
  const PairedDraws draws = gaussian_paired_draws(kLeft, 1.0, 1000, 30, 40000, 66);
  const ScalarCheck scalar = check_total_variance_scalar(draws, 0);
  const DetCheck det = check_total_covariance_det(draws, 1);
  CHECK(det.det_cov_y == doctest::Approx(scalar.var_y).epsilon(1e-12));
  CHECK(det.det_expected_cond_cov ==
        doctest::Approx(scalar.expected_cond_var).epsilon(1e-12));
  CHECK(det.verdict == scalar.verdict);
}

TEST_CASE("determinant check in two dimensions") {
  SUBCASE("independent consistent components pass") {
    const PairedDraws draws = two_dim_draws(1.0, 1500, 40, 60000, 67);
    const DetCheck det = check_total_covariance_det(draws, 2);
    CHECK(det.det_cov_y == doctest::Approx(1.09 * 1.09).epsilon(0.05));
    CHECK(det.det_expected_cond_cov == doctest::Approx(1.0).epsilon(0.05));
    CHECK(det.verdict == Verdict::Pass);
    CHECK_FALSE(det.singular_estimate);
  }
  SUBCASE("overdispersed evidence fails") {
    const PairedDraws draws = two_dim_draws(4.0, 1500, 40, 60000, 68);
    const DetCheck det = check_total_covariance_det(draws, 2);
    CHECK(det.det_expected_cond_cov == doctest::Approx(16.0).epsilon(0.05));
    CHECK(det.verdict == Verdict::Fail);
  }
}

TEST_CASE("structure check") {
  SUBCASE("one dimension is inapplicable and trivially fine") {
    const StructureCheck check = check_factorization_structure({{0}}, {{0}});
    CHECK_FALSE(check.applicable);
    CHECK(check.verdict == Verdict::Pass);
    CHECK(check.note.find("trivially") != std::string::npos);
  }
  SUBCASE("shared x parent fails") {
    const StructureCheck check = check_factorization_structure({{0}, {0}}, {{0}, {1}});
    CHECK(check.applicable);
    CHECK(check.verdict == Verdict::Fail);
  }
  SUBCASE("shared zeta component fails") {
    const StructureCheck check = check_factorization_structure({{0}, {1}}, {{0}, {0}});
    CHECK(check.verdict == Verdict::Fail);
  }
  SUBCASE("multiple parents fail") {
    const StructureCheck check = check_factorization_structure({{0, 1}, {1}}, {{0}, {1}});
    CHECK(check.verdict == Verdict::Fail);
  }
  SUBCASE("unique links pass") {
    const StructureCheck check = check_factorization_structure({{0}, {1}}, {{0}, {1}});
    CHECK(check.applicable);
    CHECK(check.verdict == Verdict::Pass);
  }
  SUBCASE("disagreeing dimensions throw") {
    CHECK_THROWS_AS(check_factorization_structure({{0}}, {{0}, {1}}), DimensionMismatch);
  }
}

TEST_CASE("draw validation") {
  PairedDraws draws;
  draws.zeta_draws = {{0.0}};
  draws.y_draws_per_zeta = {{{0.0}, {1.0}}};
  draws.base_y_draws = {{0.0}, {1.0}};
  CHECK_THROWS_AS(check_total_variance_scalar(draws, 0), TooFewDraws);

  const PairedDraws ok = gaussian_paired_draws(kLeft, 1.0, 10, 5, 10, 1);
  CHECK_THROWS_AS(check_total_variance_scalar(ok, 3), DimensionMismatch);
  CHECK_THROWS_AS(gaussian_paired_draws(kLeft, 1.0, 1, 5, 10, 1), TooFewDraws);
}

TEST_CASE("ball-drop defaults pass the scalar diagnostic") {
  const BaseModel model = make_ball_drop_model(9.81, 2.0, 1.0, 0.005);
  const PairedDraws draws = fixed_zeta_paired_draws(model, normal_density(0.43, 0.03),
                                                    0.43, 2000, 50, 100000, 70);
  const ScalarCheck check = check_total_variance_scalar(draws, 0);
  CHECK(check.expected_cond_var == doctest::Approx(9e-4).epsilon(0.05));
  CHECK(check.var_y > 1.5e-3);  // prior sd 2 puts about 2.1e-3 of total spread on t
  CHECK(check.verdict == Verdict::Pass);
}

TEST_CASE("report assembly and serialization") {
  const PairedDraws draws = gaussian_paired_draws(kLeft, 1.0, 500, 20, 20000, 71);
  const ConsistencyReport report = run_consistency_checks(draws, {{0}}, {{0}}, 5);
  REQUIRE(report.scalar_checks.size() == 1);
  CHECK(report.scalar_checks[0].verdict == Verdict::Pass);
  CHECK_FALSE(report.condition1_note.empty());

  const nlohmann::json doc = to_json(report);
  CHECK(doc.contains("scalar_checks"));
  CHECK(doc.contains("det_check"));
  CHECK(doc.contains("structure_check"));
  CHECK(doc["scalar_checks"][0]["verdict"] == "pass");
  CHECK(doc["structure_check"]["applicable"] == false);
}
