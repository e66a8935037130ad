#include "uev/discrete.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "uev/errors.hpp"

namespace uev {

namespace {

constexpr double kMassTolerance = 1e-12;

void require_q_shape(const JointTable& joint, const std::vector<double>& q_y,
                     const char* who) {
  if (q_y.size() != joint.num_y()) {
    throw DimensionMismatch(std::string(who) + ": q has " + std::to_string(q_y.size()) +
                            " entries for " + std::to_string(joint.num_y()) + " y values");
  }
  double total = 0.0;
  for (double q : q_y) {
    if (q < 0.0 || !std::isfinite(q)) {
      throw DomainError(std::string(who) + ": q entries must be finite and non-negative");
    }
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError(std::string(who) + ": q must sum to 1, got " + std::to_string(total));
  }
}

}  // namespace

JointTable::JointTable(std::vector<double> x_values, std::vector<double> y_values,
                       std::vector<std::vector<double>> probs)
    : x_values_(std::move(x_values)),
      y_values_(std::move(y_values)),
      probs_(std::move(probs)) {
  if (x_values_.empty() || y_values_.empty()) {
    throw DimensionMismatch("JointTable: empty support");
  }
  if (probs_.size() != y_values_.size()) {
    throw DimensionMismatch("JointTable: probs has " + std::to_string(probs_.size()) +
                            " rows for " + std::to_string(y_values_.size()) + " y values");
  }
  double total = 0.0;
  for (const auto& row : probs_) {
    if (row.size() != x_values_.size()) {
      throw DimensionMismatch("JointTable: ragged probs row");
    }
    for (double p : row) {
      if (p < 0.0 || !std::isfinite(p)) {
        throw DomainError("JointTable: entries must be finite and non-negative");
      }
      total += p;
    }
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw DomainError("JointTable: total mass is " + std::to_string(total) +
                      ", expected 1 within 1e-12");
  }
}

std::vector<double> JointTable::y_marginal() const {
  std::vector<double> marg(num_y(), 0.0);
  for (std::size_t k = 0; k < num_y(); ++k) {
    for (std::size_t j = 0; j < num_x(); ++j) marg[k] += probs_[k][j];
  }
  return marg;
}

std::vector<double> JointTable::x_marginal() const {
  std::vector<double> marg(num_x(), 0.0);
  for (std::size_t k = 0; k < num_y(); ++k) {
    for (std::size_t j = 0; j < num_x(); ++j) marg[j] += probs_[k][j];
  }
  return marg;
}

std::vector<std::vector<double>> JointTable::conditional_x_given_y() const {
  const std::vector<double> marg = y_marginal();
  std::vector<std::vector<double>> cond(num_y(), std::vector<double>(num_x(), 0.0));
  for (std::size_t k = 0; k < num_y(); ++k) {
    if (marg[k] <= 0.0) continue;
    for (std::size_t j = 0; j < num_x(); ++j) cond[k][j] = probs_[k][j] / marg[k];
  }
  return cond;
}

JointTable JointTable::from_json(const nlohmann::json& doc) {
  return JointTable(doc.at("x_values").get<std::vector<double>>(),
                    doc.at("y_values").get<std::vector<double>>(),
                    doc.at("probs").get<std::vector<std::vector<double>>>());
}

nlohmann::json JointTable::to_json() const {
  nlohmann::json doc;
  doc["x_values"] = x_values_;
  doc["y_values"] = y_values_;
  doc["probs"] = probs_;
  return doc;
}

std::vector<double> jeffrey_update_table(const JointTable& joint,
                                         const std::vector<double>& q_y) {
  require_q_shape(joint, q_y, "jeffrey_update_table");
  const std::vector<double> marg = joint.y_marginal();
  const auto cond = joint.conditional_x_given_y();
  std::vector<double> posterior(joint.num_x(), 0.0);
  for (std::size_t k = 0; k < joint.num_y(); ++k) {
    if (q_y[k] == 0.0) continue;
    if (marg[k] <= 0.0) {
      throw ZeroMarginal("jeffrey_update_table: q places mass " + std::to_string(q_y[k]) +
                         " on y index " + std::to_string(k) + " whose marginal is zero");
    }
    for (std::size_t j = 0; j < joint.num_x(); ++j) {
      posterior[j] += q_y[k] * cond[k][j];
    }
  }
  return posterior;
}

std::vector<double> virtual_update_table(const JointTable& joint,
                                         const LikelihoodRatios& ratios) {
  if (ratios.lambdas.size() != joint.num_y()) {
    throw DimensionMismatch("virtual_update_table: ratios length mismatch");
  }
  for (double l : ratios.lambdas) {
    if (l < 0.0 || !std::isfinite(l)) {
      throw DomainError("virtual_update_table: ratios must be finite and non-negative");
    }
  }
  double denom = 0.0;
  const std::vector<double> marg = joint.y_marginal();
  for (std::size_t k = 0; k < joint.num_y(); ++k) denom += ratios.lambdas[k] * marg[k];
  if (!(denom > 0.0)) {
    throw DegenerateEvidence(
        "virtual_update_table: the ratios put no mass anywhere the model does");
  }
  std::vector<double> posterior(joint.num_x(), 0.0);
  for (std::size_t k = 0; k < joint.num_y(); ++k) {
    if (ratios.lambdas[k] == 0.0) continue;
    for (std::size_t j = 0; j < joint.num_x(); ++j) {
      posterior[j] += ratios.lambdas[k] * joint.prob(k, j);
    }
  }
  for (double& p : posterior) p /= denom;
  return posterior;
}

std::vector<double> enumerate_extended_posterior(const JointTable& joint,
                                                 const std::vector<double>& zeta_lik) {
  if (zeta_lik.size() != joint.num_y()) {
    throw DimensionMismatch("enumerate_extended_posterior: zeta_lik length mismatch");
  }
  // Extend the table with the auxiliary variable and sum it out by brute force.
  std::vector<std::vector<double>> extended(joint.num_y(),
                                            std::vector<double>(joint.num_x(), 0.0));
  double normalizer = 0.0;
  for (std::size_t k = 0; k < joint.num_y(); ++k) {
    if (zeta_lik[k] < 0.0 || !std::isfinite(zeta_lik[k])) {
      throw DomainError("enumerate_extended_posterior: likelihood values must be finite "
                        "and non-negative");
    }
    for (std::size_t j = 0; j < joint.num_x(); ++j) {
      extended[k][j] = zeta_lik[k] * joint.prob(k, j);
      normalizer += extended[k][j];
    }
  }
  if (!(normalizer > 0.0)) {
    throw DegenerateEvidence("enumerate_extended_posterior: zero total extended mass");
  }
  std::vector<double> posterior(joint.num_x(), 0.0);
  for (std::size_t k = 0; k < joint.num_y(); ++k) {
    for (std::size_t j = 0; j < joint.num_x(); ++j) {
      posterior[j] += extended[k][j];
    }
  }
  for (double& p : posterior) p /= normalizer;
  return posterior;
}

std::vector<double> sequential_jeffrey(const JointTable& joint,
                                       const std::vector<std::vector<double>>& qs) {
  if (qs.empty()) {
    throw DomainError("sequential_jeffrey: no evidence supplied");
  }
  // Each update replaces the y-marginal and preserves the conditional of x
  // given y; the conditional therefore never changes across the sequence, and
  // the last update determines the answer.
  const auto cond = joint.conditional_x_given_y();
  const std::vector<double> base_marg = joint.y_marginal();
  std::vector<double> posterior;
  for (const auto& q : qs) {
    require_q_shape(joint, q, "sequential_jeffrey");
    posterior.assign(joint.num_x(), 0.0);
    for (std::size_t k = 0; k < joint.num_y(); ++k) {
      if (q[k] == 0.0) continue;
      if (base_marg[k] <= 0.0) {
        throw ZeroMarginal("sequential_jeffrey: q places mass on y index " +
                           std::to_string(k) + " where the conditional of x is undefined");
      }
      for (std::size_t j = 0; j < joint.num_x(); ++j) {
        posterior[j] += q[k] * cond[k][j];
      }
    }
  }
  return posterior;
}

std::vector<double> sequential_virtual(const JointTable& joint,
                                       const std::vector<LikelihoodRatios>& ratio_list) {
  if (ratio_list.empty()) {
    throw DomainError("sequential_virtual: no evidence supplied");
  }
  LikelihoodRatios product;
  product.lambdas.assign(joint.num_y(), 1.0);
  for (const auto& ratios : ratio_list) {
    if (ratios.lambdas.size() != joint.num_y()) {
      throw DimensionMismatch("sequential_virtual: ratios length mismatch");
    }
    for (std::size_t k = 0; k < joint.num_y(); ++k) {
      product.lambdas[k] *= ratios.lambdas[k];
    }
  }
  return virtual_update_table(joint, product);
}

}  // namespace uev
