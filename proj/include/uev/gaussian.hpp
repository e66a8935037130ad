#pragma once

namespace uev {

/// Mean and variance of a scalar Gaussian.
struct GaussianParams {
  double mean = 0.0;
  double variance = 1.0;  // strictly positive

  double sd() const;
};

/// Conjugate scalar chain: x ~ N(prior.mean, prior.variance) and
/// y | x ~ N(x, obs_noise_sd^2).
struct GaussianChain {
  GaussianParams prior;
  double obs_noise_sd = 1.0;  // strictly positive
};

/// log N(y; mean, sd^2).
double normal_log_pdf(double y, double mean, double sd);

/// Posterior of x after observing y exactly. With s^2 = (1/sx^2 + 1/sn^2)^-1
/// the result is N(s^2 (mu/sx^2 + y/sn^2), s^2).
GaussianParams exact_posterior(const GaussianChain& chain, double y);

/// Jeffrey update of the chain given the evidence density q(y|zeta) =
/// N(zeta_mean, sigma_q^2): the mixture of exact posteriors over y ~ q,
/// collapsed in closed form. Writing the conditional posterior mean as
/// a + b*y, the mixture is N(a + b*zeta_mean, s^2 + b^2 sigma_q^2).
GaussianParams jeffrey_posterior_gaussian(const GaussianChain& chain, double zeta_mean,
                                          double sigma_q);

/// Virtual-evidence update with likelihood q(zeta|y) = N(y, sigma_qzeta^2).
/// Marginalizing y makes zeta an observation of x with noise variance
/// obs_noise_sd^2 + sigma_qzeta^2.
GaussianParams virtual_posterior_gaussian(const GaussianChain& chain, double zeta,
                                          double sigma_qzeta);

/// Distributional-evidence update for q(y) = N(mu_q, sigma_q^2). For Gaussian
/// likelihoods the pseudo-likelihood is proportional (in x) to the exact
/// likelihood at y = mu_q, so this reduces to exact_posterior(chain, mu_q);
/// sigma_q does not enter the result.
GaussianParams distributional_posterior_gaussian(const GaussianChain& chain, double mu_q,
                                                 double sigma_q);

/// Explicit p(zeta|y) = N(mu_zeta_given_y, sigma_zeta_given_y_sq) witnessing
/// that the Jeffrey update with q(y|zeta) = N(zeta, sigma_q^2) is consistent
/// with the chain. Exists iff sigma_zeta_sq = sx^2 + sn^2 - sigma_q^2 >= 0.
struct ConsistencyWitness {
  double sigma_zeta_sq = 0.0;
  double mu_zeta_given_y = 0.0;
  double sigma_zeta_given_y_sq = 0.0;
};

/// Throws InconsistentEvidence when sigma_zeta_sq < 0 (no extended joint can
/// reproduce q, so Jeffrey's rule is inconsistent with this chain).
ConsistencyWitness consistency_construction(const GaussianChain& chain, double sigma_q, double y);

/// Mean fall time for a drop of `distance` under constant acceleration g:
/// sqrt(2 * distance / g). Throws DomainError on non-positive inputs.
double ball_drop_mean_time(double g, double distance);

/// KL(p || q) between two scalar Gaussians.
double gaussian_kl(const GaussianParams& p, const GaussianParams& q);

}  // namespace uev
