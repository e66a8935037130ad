#include "uev/gaussian.hpp"

#include <cmath>
#include <string>

#include "uev/errors.hpp"

namespace uev {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

void require_valid(const GaussianChain& chain) {
  if (!(chain.prior.variance > 0.0)) {
    throw DomainError("GaussianChain: prior variance must be positive, got " +
                      std::to_string(chain.prior.variance));
  }
  if (!(chain.obs_noise_sd > 0.0)) {
    throw DomainError("GaussianChain: obs_noise_sd must be positive, got " +
                      std::to_string(chain.obs_noise_sd));
  }
}

}  // namespace

double GaussianParams::sd() const { return std::sqrt(variance); }

double normal_log_pdf(double y, double mean, double sd) {
  const double z = (y - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
}

GaussianParams exact_posterior(const GaussianChain& chain, double y) {
  require_valid(chain);
  const double prior_var = chain.prior.variance;
  const double noise_var = chain.obs_noise_sd * chain.obs_noise_sd;
  const double s2 = 1.0 / (1.0 / prior_var + 1.0 / noise_var);
  const double mean = s2 * (chain.prior.mean / prior_var + y / noise_var);
  return {mean, s2};
}

GaussianParams jeffrey_posterior_gaussian(const GaussianChain& chain, double zeta_mean,
                                          double sigma_q) {
  require_valid(chain);
  if (!(sigma_q > 0.0)) {
    throw DomainError("jeffrey_posterior_gaussian: sigma_q must be positive");
  }
  const double prior_var = chain.prior.variance;
  const double noise_var = chain.obs_noise_sd * chain.obs_noise_sd;
  const double s2 = 1.0 / (1.0 / prior_var + 1.0 / noise_var);
  const double b = s2 / noise_var;
  const double a = s2 * chain.prior.mean / prior_var;
  return {a + b * zeta_mean, s2 + b * b * sigma_q * sigma_q};
}

GaussianParams virtual_posterior_gaussian(const GaussianChain& chain, double zeta,
                                          double sigma_qzeta) {
  require_valid(chain);
  if (!(sigma_qzeta > 0.0)) {
    throw DomainError("virtual_posterior_gaussian: sigma_qzeta must be positive");
  }
  const double prior_var = chain.prior.variance;
  const double total_noise =
      chain.obs_noise_sd * chain.obs_noise_sd + sigma_qzeta * sigma_qzeta;
  const double v = 1.0 / (1.0 / prior_var + 1.0 / total_noise);
  const double mean = v * (chain.prior.mean / prior_var + zeta / total_noise);
  return {mean, v};
}

GaussianParams distributional_posterior_gaussian(const GaussianChain& chain, double mu_q,
                                                 double sigma_q) {
  require_valid(chain);
  if (!(sigma_q > 0.0)) {
    throw DomainError("distributional_posterior_gaussian: sigma_q must be positive");
  }
  // sigma_q only contributes an x-independent constant to the pseudo-likelihood.
  return exact_posterior(chain, mu_q);
}

ConsistencyWitness consistency_construction(const GaussianChain& chain, double sigma_q,
                                            double y) {
  require_valid(chain);
  if (!(sigma_q > 0.0)) {
    throw DomainError("consistency_construction: sigma_q must be positive");
  }
  const double sq2 = sigma_q * sigma_q;
  const double var_y = chain.prior.variance + chain.obs_noise_sd * chain.obs_noise_sd;
  const double sigma_zeta_sq = var_y - sq2;
  if (sigma_zeta_sq < 0.0) {
    throw InconsistentEvidence(
        "consistency_construction: sigma_zeta_sq = " + std::to_string(sigma_zeta_sq) +
        " < 0; the evidence variance exceeds the model's total variance of y, so "
        "Jeffrey's rule cannot be consistent with this chain");
  }
  ConsistencyWitness w;
  w.sigma_zeta_sq = sigma_zeta_sq;
  w.mu_zeta_given_y =
      (y * sigma_zeta_sq + chain.prior.mean * sq2) / (sigma_zeta_sq + sq2);
  w.sigma_zeta_given_y_sq = sigma_zeta_sq * sq2 / (sigma_zeta_sq + sq2);
  return w;
}

double ball_drop_mean_time(double g, double distance) {
  if (!(g > 0.0) || !(distance > 0.0)) {
    throw DomainError("ball_drop_mean_time: g and distance must be positive");
  }
  return std::sqrt(2.0 * distance / g);
}

double gaussian_kl(const GaussianParams& p, const GaussianParams& q) {
  if (!(p.variance > 0.0) || !(q.variance > 0.0)) {
    throw DomainError("gaussian_kl: variances must be positive");
  }
  const double dm = p.mean - q.mean;
  return 0.5 * std::log(q.variance / p.variance) +
         (p.variance + dm * dm) / (2.0 * q.variance) - 0.5;
}

}  // namespace uev
