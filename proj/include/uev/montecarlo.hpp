#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "uev/density.hpp"
#include "uev/model.hpp"

namespace uev {

enum class EngineKind { AnalyticGaussian, DiscreteExact, Snis, Mh };

/// Engine selection and sample budgets. One master seed drives every
/// stochastic sub-step through derive_seed, so runs are reproducible and
/// sub-streams can execute in parallel.
struct EngineConfig {
  EngineKind engine = EngineKind::Snis;
  std::size_t n = 100000;     // draws per engine run
  std::size_t n_e = 256;      // inner / expectation draws
  std::size_t mh_steps = 100000;
  std::size_t mh_burn_in = 5000;
  double mh_step_scale = 0.5;
  std::uint64_t seed = 1;
};

/// Draws of x with raw log-weights. Moments, standard errors and the effective
/// sample size are computed from the self-normalized weights.
class WeightedSamples {
 public:
  WeightedSamples(std::vector<Point> points, std::vector<double> log_weights,
                  std::uint64_t seed);

  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& log_weights() const { return log_weights_; }
  const std::vector<double>& normalized_weights() const { return norm_weights_; }
  std::size_t size() const { return points_.size(); }
  std::uint64_t seed() const { return seed_; }

  /// (sum w)^2 / sum w^2 of the normalized weights; in [1, n].
  double ess() const { return ess_; }
  /// True when ess < 0.01 * n, a weight-degeneracy warning.
  bool degenerate_weights() const;

  double mean(std::size_t dim = 0) const;
  double variance(std::size_t dim = 0) const;
  /// Standard error of the mean estimator. By default the self-normalized
  /// delta-method estimator sqrt(sum_i wbar_i^2 (x_i - mean)^2); producers
  /// whose estimators carry extra structure (nested mixtures, common random
  /// numbers for an inner expectation) install the total standard error via
  /// set_total_mean_standard_error.
  double mean_standard_error(std::size_t dim = 0) const;
  void set_total_mean_standard_error(std::vector<double> per_dim_se);

 private:
  std::vector<Point> points_;
  std::vector<double> log_weights_;
  std::vector<double> norm_weights_;
  std::vector<double> total_mean_se_;  // empty: use the delta method
  std::uint64_t seed_ = 0;
  double ess_ = 0.0;
};

struct MhResult {
  std::vector<Point> draws;  // post burn-in
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Self-normalized importance sampling: draws x_i from the proposal and
/// weights them by target_log_pdf(x_i) - proposal.log_pdf(x_i). Throws
/// AllWeightsZero when no draw lands in the target's support.
WeightedSamples snis(const std::function<double(const Point&)>& target_log_pdf,
                     const Density& proposal, std::size_t n, std::uint64_t seed);

/// Random-walk Metropolis-Hastings with an isotropic Gaussian proposal of
/// scale config.mh_step_scale. Returns the post-burn-in chain and the overall
/// acceptance rate. Throws InitOffSupport when the target is not finite at init.
MhResult mh(const std::function<double(const Point&)>& target_log_pdf, const Point& init,
            const EngineConfig& config);

/// Batch-means standard error of the chain mean; the estimator of choice for
/// correlated MH output.
double batch_means_standard_error(const std::vector<Point>& draws, std::size_t dim,
                                  std::size_t n_batches = 32);

/// Jeffrey's rule by nested estimation: draws y_1..y_{n_e} from q, runs the
/// configured engine against p(x|y_j) with budget n for each, and pools the
/// runs with equal per-component mass. The pooled draws target the mixture
/// E_q[p(x|y)]. Cost is one engine run per inner draw.
WeightedSamples jeffrey_mixture_infer(const BaseModel& model, const Density& q_sampler,
                                      const EngineConfig& config);

/// Virtual evidence: targets the extended joint q(zeta|y) p(y|x) p(x) over
/// (x, y) and returns the x-marginal draws. The default SNIS proposal is
/// ancestral simulation of (x, y) from the model, leaving q(zeta|y) as the weight.
WeightedSamples virtual_infer(const BaseModel& model,
                              const std::function<double(const Point&)>& zeta_log_lik,
                              const EngineConfig& config);

/// Monte Carlo estimate of E_{q(y)}[ln p(y|x)] with n_e draws generated from
/// the seed alone. The same y draws are reused for every x (common random
/// numbers), so per seed the estimated surface is a fixed function of x; the
/// bias of downstream inference vanishes as n_e grows. If any drawn y falls
/// off the likelihood support the estimate is -infinity (reported, not dropped).
double distributional_pseudo_loglik(const BaseModel& model, const Density& q_sampler,
                                    const Point& x, std::size_t n_e, std::uint64_t seed);

enum class DistributionalMode { Pseudo, Normalized };

/// Distributional evidence: infers against the implied joint
/// exp(pseudo_loglik(x)) p(x). Normalized mode divides the pseudo-likelihood
/// by a caller-supplied Z(x) (log scale) and throws NormalizerUnavailable
/// without one; with constant Z both modes produce identical weighted samples.
WeightedSamples distributional_infer(const BaseModel& model, const Density& q_sampler,
                                     const EngineConfig& config, DistributionalMode mode,
                                     std::function<double(const Point&)> log_z = {});

}  // namespace uev
