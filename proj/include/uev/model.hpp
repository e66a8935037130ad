#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "uev/density.hpp"
#include "uev/discrete.hpp"

namespace uev {

/// A base model: prior over the latent x plus a likelihood mapping x to a
/// density over the observable y. Immutable after construction and safe to
/// share across threads.
struct BaseModel {
  Density prior;
  std::function<Density(const Point&)> likelihood;
  int dimension_x = 1;
  int dimension_y = 1;
  /// Set when (prior, likelihood) form the recognized conjugate chain; enables
  /// the analytic engine.
  std::optional<GaussianChain> gaussian_chain;
  /// Set when the model is a finite joint table; enables the exact discrete engine.
  std::shared_ptr<const JointTable> table;
};

/// log p(y, x) = log p(x) + log p(y|x); -infinity off either support.
double log_joint(const BaseModel& model, const Point& x, const Point& y);

/// x ~ N(prior), y | x ~ N(x, obs_noise_sd^2).
BaseModel make_gaussian_chain_model(const GaussianChain& chain);

/// Gravity-from-fall-time model: g ~ N(prior_mean, prior_sd^2) truncated to
/// g > 0, and t | g ~ N(sqrt(2 * distance / g), model_sd^2).
BaseModel make_ball_drop_model(double prior_mean, double prior_sd, double distance,
                               double model_sd);

/// Finite model backed by a joint table; x and y points are the table's values.
BaseModel make_table_model(std::shared_ptr<const JointTable> table);

}  // namespace uev
