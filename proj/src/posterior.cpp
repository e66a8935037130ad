#include "uev/posterior.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "uev/errors.hpp"

namespace uev {

double TablePosterior::mean() const {
  double m = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) m += probs[j] * x_values[j];
  return m;
}

double TablePosterior::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double d = x_values[j] - m;
    v += probs[j] * d * d;
  }
  return v;
}

TablePosterior make_table_posterior(std::vector<double> x_values,
                                    std::vector<double> unnormalized) {
  if (x_values.empty() || x_values.size() != unnormalized.size()) {
    throw DimensionMismatch("make_table_posterior: values and probabilities must match");
  }
  double total = 0.0;
  for (double p : unnormalized) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw DomainError("make_table_posterior: probabilities must be finite and "
                        "non-negative");
    }
    total += p;
  }
  if (!(total > 0.0)) {
    throw DegenerateEvidence("make_table_posterior: zero total mass");
  }
  for (double& p : unnormalized) p /= total;
  double check = 0.0;
  for (double p : unnormalized) check += p;
  if (std::abs(check - 1.0) > 1e-12) {
    throw DomainError("make_table_posterior: normalization failed, total " +
                      std::to_string(check));
  }
  return TablePosterior{std::move(x_values), std::move(unnormalized)};
}

double Posterior::mean() const {
  if (is_analytic()) return analytic().mean;
  if (is_table()) return table().mean();
  return samples().mean();
}

double Posterior::variance() const {
  if (is_analytic()) return analytic().variance;
  if (is_table()) return table().variance();
  return samples().variance();
}

}  // namespace uev
