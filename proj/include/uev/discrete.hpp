#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

namespace uev {

/// Dense joint probability table over finite supports: probs[k][j] = p(y_k, x_j).
/// Entries are non-negative and sum to 1 within 1e-12. The tables this library
/// targets are tiny, so no sparsity machinery.
class JointTable {
 public:
  JointTable(std::vector<double> x_values, std::vector<double> y_values,
             std::vector<std::vector<double>> probs);

  std::size_t num_x() const { return x_values_.size(); }
  std::size_t num_y() const { return y_values_.size(); }
  const std::vector<double>& x_values() const { return x_values_; }
  const std::vector<double>& y_values() const { return y_values_; }
  double prob(std::size_t y_index, std::size_t x_index) const {
    return probs_[y_index][x_index];
  }

  /// p(y_k) = sum_j p(y_k, x_j).
  std::vector<double> y_marginal() const;
  std::vector<double> x_marginal() const;

  /// Conditional rows p(x | y_k); rows with p(y_k) = 0 are left as zeros.
  std::vector<std::vector<double>> conditional_x_given_y() const;

  /// JSON document shape: {"x_values": [...], "y_values": [...], "probs": [[...]]}.
  static JointTable from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

 private:
  std::vector<double> x_values_;
  std::vector<double> y_values_;
  std::vector<std::vector<double>> probs_;
};

/// Scale-free likelihood ratios lambda_k >= 0 over the y atoms; any positive
/// rescaling encodes the same evidence.
struct LikelihoodRatios {
  std::vector<double> lambdas;
};

/// Jeffrey's rule on a finite table: p(x|zeta) = sum_k q(y_k) p(x|y_k).
/// Throws ZeroMarginal if q places mass on a y_k with p(y_k) = 0.
std::vector<double> jeffrey_update_table(const JointTable& joint,
                                         const std::vector<double>& q_y);

/// Virtual-evidence update: p(x|zeta) = sum_k lambda_k p(y_k, x) / sum_j lambda_j p(y_j).
/// Invariant under positive rescaling of the ratios.
std::vector<double> virtual_update_table(const JointTable& joint,
                                         const LikelihoodRatios& ratios);

/// Brute-force posterior of the table extended with an auxiliary variable of
/// likelihood p(zeta|y_k) = zeta_lik[k]. Serves as the enumeration oracle for
/// virtual_update_table.
std::vector<double> enumerate_extended_posterior(const JointTable& joint,
                                                 const std::vector<double>& zeta_lik);

/// Applies Jeffrey's rule for each q in order, each update replacing the
/// y-marginal while preserving the conditional of x given y. The last update
/// wins: the result equals jeffrey_update_table(joint, qs.back()).
std::vector<double> sequential_jeffrey(const JointTable& joint,
                                       const std::vector<std::vector<double>>& qs);

/// Conditions on all pieces of virtual evidence jointly via elementwise
/// products of the ratios; order-independent by construction. Throws
/// DegenerateEvidence when the product annihilates all joint mass, which may
/// indicate a misspecified model.
std::vector<double> sequential_virtual(const JointTable& joint,
                                       const std::vector<LikelihoodRatios>& ratio_list);

}  // namespace uev
