#pragma once

#include <variant>
#include <vector>

#include "uev/gaussian.hpp"
#include "uev/montecarlo.hpp"

namespace uev {

/// Finite posterior table over x; probabilities are non-negative and sum to 1
/// within 1e-12.
struct TablePosterior {
  std::vector<double> x_values;
  std::vector<double> probs;

  double mean() const;
  double variance() const;
};

/// Normalizes and validates a finite posterior.
TablePosterior make_table_posterior(std::vector<double> x_values,
                                    std::vector<double> unnormalized);

/// A posterior in one of three representations: closed-form Gaussian, finite
/// table, or weighted samples.
class Posterior {
 public:
  explicit Posterior(GaussianParams analytic) : rep_(analytic) {}
  explicit Posterior(TablePosterior table) : rep_(std::move(table)) {}
  explicit Posterior(WeightedSamples samples) : rep_(std::move(samples)) {}

  bool is_analytic() const { return std::holds_alternative<GaussianParams>(rep_); }
  bool is_table() const { return std::holds_alternative<TablePosterior>(rep_); }
  bool is_samples() const { return std::holds_alternative<WeightedSamples>(rep_); }

  const GaussianParams& analytic() const { return std::get<GaussianParams>(rep_); }
  const TablePosterior& table() const { return std::get<TablePosterior>(rep_); }
  const WeightedSamples& samples() const { return std::get<WeightedSamples>(rep_); }

  double mean() const;
  double variance() const;

 private:
  std::variant<GaussianParams, TablePosterior, WeightedSamples> rep_;
};

}  // namespace uev
