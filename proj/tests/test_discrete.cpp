#include <cmath>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "oracles.hpp"
#include "uev/discrete.hpp"
#include "uev/errors.hpp"
#include "uev/rng.hpp"

using namespace uev;
using uev::testing::random_probability_vector;
using uev::testing::random_table;
using uev::testing::running_joint;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("table validation") {
  CHECK_THROWS_AS(JointTable({0.0, 1.0}, {0.0, 1.0}, {{0.5, 0.5}, {0.5, 0.5}}),
                  DomainError);  // mass 2
  CHECK_THROWS_AS(JointTable({0.0, 1.0}, {0.0, 1.0}, {{0.6, -0.1}, {0.25, 0.25}}),
                  DomainError);
  CHECK_THROWS_AS(JointTable({0.0, 1.0}, {0.0}, {{0.5, 0.5}, {0.0, 0.0}}),
                  DimensionMismatch);
}

TEST_CASE("jeffrey_update_table on the worked example") {
  const JointTable joint = running_joint();
  // Hand enumeration: (1/3) * 0.2 + (2/3) * 0.8 = 0.6.
  const auto post = jeffrey_update_table(joint, {1.0 / 3.0, 2.0 / 3.0});
  CHECK(post[1] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(post[0] + post[1] == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("point-mass q returns the conditional") {
    const auto cond = jeffrey_update_table(joint, {1.0, 0.0});
    CHECK(cond[1] == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("q equal to the model marginal returns the prior") {
    const auto prior = jeffrey_update_table(joint, joint.y_marginal());
    CHECK(prior[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(prior[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("mass on a zero-marginal y throws") {
    const JointTable degenerate({0.0, 1.0}, {0.0, 1.0}, {{0.5, 0.5}, {0.0, 0.0}});
    CHECK_THROWS_AS(jeffrey_update_table(degenerate, {0.5, 0.5}), ZeroMarginal);
  }
}

TEST_CASE("virtual_update_table on the worked example") {
  const JointTable joint = running_joint();
  // (1 * 0.1 + 2 * 0.4) / (1 * 0.5 + 2 * 0.5) = 0.6.
  const auto post = virtual_update_table(joint, {{1.0, 2.0}});
  CHECK(post[1] == doctest::Approx(0.6).epsilon(1e-12));

  SUBCASE("uniform ratios return the prior") {
    for (double c : {0.3, 1.0, 17.0}) {
      const auto prior = virtual_update_table(joint, {{c, c}});
      CHECK(prior[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  SUBCASE("a single surviving ratio conditions exactly") {
    const auto cond = virtual_update_table(joint, {{0.0, 1.0}});
    CHECK(cond[1] == doctest::Approx(0.8).epsilon(1e-12));
  }
  SUBCASE("all-zero overlap throws") {
    CHECK_THROWS_AS(virtual_update_table(joint, {{0.0, 0.0}}), DegenerateEvidence);
  }
}

TEST_CASE("enumerate_extended_posterior agrees with the scaled ratios") {
  const JointTable joint = running_joint();
  // zeta_lik = 0.3 * (1, 2).
  const auto post = enumerate_extended_posterior(joint, {0.3, 0.6});
  CHECK(post[1] == doctest::Approx(0.6).epsilon(1e-12));
  const auto prior = enumerate_extended_posterior(joint, {1.0, 1.0});
  CHECK(prior[1] == doctest::Approx(0.5).epsilon(1e-12));
  const auto cond = enumerate_extended_posterior(joint, {0.5, 0.0});
  CHECK(cond[1] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("oracle equivalence and scale invariance on random tables") {
  RngStream rng(101);
  for (int rep = 0; rep < 300; ++rep) {
    const JointTable joint = random_table(rng);
    LikelihoodRatios ratios;
    ratios.lambdas.resize(joint.num_y());
    for (double& l : ratios.lambdas) l = 0.05 + 5.0 * rng.uniform();
    const auto direct = virtual_update_table(joint, ratios);
    for (double c : {0.25, 1.0, 3.75}) {
      std::vector<double> scaled = ratios.lambdas;
      for (double& l : scaled) l *= c;
      CHECK(max_abs_diff(direct, enumerate_extended_posterior(joint, scaled)) < 1e-12);
      CHECK(max_abs_diff(direct, virtual_update_table(joint, {scaled})) < 1e-12);
    }
  }
}

TEST_CASE("sequential_jeffrey forgets everything but the last evidence") {
  const JointTable joint = running_joint();
  const std::vector<double> qa{0.1, 0.9};
  const std::vector<double> qb{0.9, 0.1};
  const auto ab = sequential_jeffrey(joint, {qa, qb});
  const auto ba = sequential_jeffrey(joint, {qb, qa});
  CHECK(ab[1] == doctest::Approx(0.26).epsilon(1e-12));
  CHECK(ba[1] == doctest::Approx(0.74).epsilon(1e-12));

  SUBCASE("repeated identical evidence is idempotent") {
    const auto once = sequential_jeffrey(joint, {qa});
    const auto twice = sequential_jeffrey(joint, {qa, qa});
    CHECK(once == twice);
  }
  SUBCASE("single element matches the one-shot update") {
    CHECK(sequential_jeffrey(joint, {qb}) == jeffrey_update_table(joint, qb));
  }
  SUBCASE("bitwise forgetting on random tables") {
    RngStream rng(55);
    for (int rep = 0; rep < 200; ++rep) {
      const JointTable t = random_table(rng);
      const auto q1 = random_probability_vector(rng, t.num_y());
      const auto q2 = random_probability_vector(rng, t.num_y());
      CHECK(sequential_jeffrey(t, {q1, q2}) == jeffrey_update_table(t, q2));
    }
  }
}

TEST_CASE("sequential_virtual commutes") {
  const JointTable joint = running_joint();
  const LikelihoodRatios la{{9.0, 1.0}};
  const LikelihoodRatios lb{{1.0, 9.0}};
  const auto ab = sequential_virtual(joint, {la, lb});
  const auto ba = sequential_virtual(joint, {lb, la});
  CHECK(max_abs_diff(ab, ba) < 1e-12);
  // Product (9, 9) is uniform: back to the prior.
  CHECK(ab[1] == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("neutral element") {
    const auto single = sequential_virtual(joint, {la});
    const auto padded = sequential_virtual(joint, {la, LikelihoodRatios{{1.0, 1.0}}});
    CHECK(max_abs_diff(single, padded) < 1e-12);
  }
  SUBCASE("contradictory hard evidence throws") {
    CHECK_THROWS_AS(
        sequential_virtual(joint, {LikelihoodRatios{{1.0, 0.0}}, LikelihoodRatios{{0.0, 1.0}}}),
        DegenerateEvidence);
  }
  SUBCASE("permutation invariance on random tables") {
    RngStream rng(77);
    for (int rep = 0; rep < 200; ++rep) {
      const JointTable t = random_table(rng);
      std::vector<LikelihoodRatios> ratios(3);
      for (auto& r : ratios) {
        r.lambdas.resize(t.num_y());
        for (double& l : r.lambdas) l = 0.05 + 5.0 * rng.uniform();
      }
      const auto abc = sequential_virtual(t, {ratios[0], ratios[1], ratios[2]});
      const auto cba = sequential_virtual(t, {ratios[2], ratios[1], ratios[0]});
      const auto bac = sequential_virtual(t, {ratios[1], ratios[0], ratios[2]});
      CHECK(max_abs_diff(abc, cba) < 1e-12);
      CHECK(max_abs_diff(abc, bac) < 1e-12);
    }
  }
}

TEST_CASE("jeffrey-virtual correspondence: q_k proportional to lambda_k p(y_k)") {
  RngStream rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const JointTable t = random_table(rng);
    LikelihoodRatios ratios;
    ratios.lambdas.resize(t.num_y());
    for (double& l : ratios.lambdas) l = 0.05 + 5.0 * rng.uniform();
    const auto marg = t.y_marginal();
    std::vector<double> q(t.num_y());
    double total = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      q[k] = ratios.lambdas[k] * marg[k];
      total += q[k];
    }
    for (double& v : q) v /= total;
    CHECK(max_abs_diff(virtual_update_table(t, ratios), jeffrey_update_table(t, q)) <
          1e-12);
  }
}

TEST_CASE("JSON round trip") {
  const JointTable joint = running_joint();
  const JointTable back = JointTable::from_json(joint.to_json());
  CHECK(back.x_values() == joint.x_values());
  CHECK(back.y_values() == joint.y_values());
  for (std::size_t k = 0; k < joint.num_y(); ++k) {
    for (std::size_t j = 0; j < joint.num_x(); ++j) {
      CHECK(back.prob(k, j) == joint.prob(k, j));
    }
  }
  // Parse from literal text as the CLI would see it.
  const auto doc = nlohmann::json::parse(
      R"({"x_values": [0, 1], "y_values": [0, 1], "probs": [[0.4, 0.1], [0.1, 0.4]]})");
  const JointTable parsed = JointTable::from_json(doc);
  CHECK(parsed.prob(1, 1) == doctest::Approx(0.4));
}
