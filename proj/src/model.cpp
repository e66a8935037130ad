#include "uev/model.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "uev/errors.hpp"

namespace uev {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_joint(const BaseModel& model, const Point& x, const Point& y) {
  if (static_cast<int>(x.size()) != model.dimension_x ||
      static_cast<int>(y.size()) != model.dimension_y) {
    throw DimensionMismatch("log_joint: point dimensions (" + std::to_string(x.size()) +
                            ", " + std::to_string(y.size()) + ") do not match model (" +
                            std::to_string(model.dimension_x) + ", " +
                            std::to_string(model.dimension_y) + ")");
  }
  const double lp = model.prior.log_pdf(x);
  if (lp == kNegInf) return kNegInf;  // likelihood may be undefined off the prior support
  return lp + model.likelihood(x).log_pdf(y);
}

BaseModel make_gaussian_chain_model(const GaussianChain& chain) {
  BaseModel model;
  model.prior = normal_density(chain.prior.mean, chain.prior.sd());
  const double noise_sd = chain.obs_noise_sd;
  model.likelihood = [noise_sd](const Point& x) {
    return normal_density(x.at(0), noise_sd);
  };
  model.gaussian_chain = chain;
  return model;
}

BaseModel make_ball_drop_model(double prior_mean, double prior_sd, double distance,
                               double model_sd) {
  if (!(distance > 0.0) || !(model_sd > 0.0) || !(prior_sd > 0.0)) {
    throw DomainError("make_ball_drop_model: distance, model_sd and prior_sd must be positive");
  }
  BaseModel model;
  model.prior = truncated_normal_density(prior_mean, prior_sd, 0.0);
  model.likelihood = [distance, model_sd](const Point& x) {
    return normal_density(ball_drop_mean_time(x.at(0), distance), model_sd);
  };
  return model;
}

BaseModel make_table_model(std::shared_ptr<const JointTable> table) {
  if (!table) {
    throw DomainError("make_table_model: null table");
  }
  BaseModel model;
  model.prior = finite_density(table->x_values(), table->x_marginal());
  // Likelihood rows p(y | x_j) from the joint; zero-marginal columns keep an
  // all-zero row and surface as -infinity log mass.
  const auto x_marg = table->x_marginal();
  std::shared_ptr<const JointTable> shared = table;
  model.likelihood = [shared, x_marg](const Point& x) {
    const double xv = x.at(0);
    const auto& xs = shared->x_values();
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (std::abs(xv - xs[j]) <= 1e-12 * std::max(1.0, std::abs(xs[j]))) {
        std::vector<double> row(shared->num_y());
        for (std::size_t k = 0; k < shared->num_y(); ++k) {
          row[k] = x_marg[j] > 0.0 ? shared->prob(k, j) / x_marg[j] : 0.0;
        }
        return finite_density(shared->y_values(), row);
      }
    }
    throw DomainError("table model likelihood: x value " + std::to_string(xv) +
                      " is not in the table support");
  };
  model.table = std::move(table);
  return model;
}

}  // namespace uev
