#include "uev/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "uev/errors.hpp"
#include "uev/rng.hpp"

namespace uev {

namespace {

void require_shapes(const PairedDraws& draws) {
  if (draws.zeta_draws.size() < 2 || draws.y_draws_per_zeta.size() < 2) {
    throw TooFewDraws("consistency checks need at least two outer zeta draws");
  }
  if (draws.zeta_draws.size() != draws.y_draws_per_zeta.size()) {
    throw DimensionMismatch("PairedDraws: zeta_draws and y_draws_per_zeta lengths differ");
  }
  const std::size_t k = draws.y_draws_per_zeta.front().size();
  if (k < 2) {
    throw TooFewDraws("consistency checks need at least two inner y draws per zeta");
  }
  const std::size_t dim = draws.y_draws_per_zeta.front().front().size();
  for (const auto& group : draws.y_draws_per_zeta) {
    if (group.size() != k) {
      throw DimensionMismatch("PairedDraws: ragged inner draw counts");
    }
    for (const auto& y : group) {
      if (y.size() != dim) throw DimensionMismatch("PairedDraws: ragged y dimensions");
    }
  }
  if (draws.base_y_draws.size() < 2) {
    throw TooFewDraws("consistency checks need at least two base-model y draws");
  }
  for (const auto& y : draws.base_y_draws) {
    if (y.size() != dim) {
      throw DimensionMismatch("PairedDraws: base draw dimension mismatch");
    }
  }
}

Verdict verdict_from_gap(double gap, double se) {
  if (gap <= -3.0 * se) return Verdict::Fail;
  if (gap >= 3.0 * se) return Verdict::Pass;
  return Verdict::Inconclusive;
}

/// Unbiased sample variance of component `dim` over a set of points.
double sample_variance(const std::vector<std::vector<double>>& points, std::size_t dim) {
  const double n = static_cast<double>(points.size());
  double mean = 0.0;
  for (const auto& p : points) mean += p[dim];
  mean /= n;
  double ss = 0.0;
  for (const auto& p : points) {
    const double d = p[dim] - mean;
    ss += d * d;
  }
  return ss / (n - 1.0);
}

/// Covariance matrix (row-major, unbiased) of a set of points.
std::vector<double> covariance_matrix(const std::vector<std::vector<double>>& points,
                                      std::size_t dim) {
  const double n = static_cast<double>(points.size());
  std::vector<double> mean(dim, 0.0);
  for (const auto& p : points) {
    for (std::size_t a = 0; a < dim; ++a) mean[a] += p[a];
  }
  for (double& m : mean) m /= n;
  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& p : points) {
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = 0; b < dim; ++b) {
        cov[a * dim + b] += (p[a] - mean[a]) * (p[b] - mean[b]);
      }
    }
  }
  for (double& c : cov) c /= (n - 1.0);
  return cov;
}

/// Determinant via LU with partial pivoting; the matrices here are tiny.
double determinant(std::vector<double> m, std::size_t dim) {
  double det = 1.0;
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < dim; ++r) {
      if (std::abs(m[r * dim + col]) > std::abs(m[pivot * dim + col])) pivot = r;
    }
    if (m[pivot * dim + col] == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < dim; ++c) std::swap(m[pivot * dim + c], m[col * dim + c]);
      det = -det;
    }
    det *= m[col * dim + col];
    for (std::size_t r = col + 1; r < dim; ++r) {
      const double f = m[r * dim + col] / m[col * dim + col];
      for (std::size_t c = col; c < dim; ++c) m[r * dim + c] -= f * m[col * dim + c];
    }
  }
  return det;
}

std::vector<double> mean_group_covariance(
    const std::vector<std::vector<std::vector<double>>>& groups,
    const std::vector<std::size_t>& indices, std::size_t dim) {
  std::vector<double> acc(dim * dim, 0.0);
  for (std::size_t i : indices) {
    const std::vector<double> cov = covariance_matrix(groups[i], dim);
    for (std::size_t a = 0; a < dim * dim; ++a) acc[a] += cov[a];
  }
  for (double& a : acc) a /= static_cast<double>(indices.size());
  return acc;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
  }
  return idx;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

ScalarCheck check_total_variance_scalar(const PairedDraws& draws, std::size_t dim) {
  require_shapes(draws);
  if (dim >= draws.y_draws_per_zeta.front().front().size()) {
    throw DimensionMismatch("check_total_variance_scalar: dim out of range");
  }

  ScalarCheck check;
  check.dim = dim;

  // Total variance of y under the base model, with a fourth-moment standard error.
  {
    const auto& base = draws.base_y_draws;
    const double n = static_cast<double>(base.size());
    double mean = 0.0;
    for (const auto& y : base) mean += y[dim];
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (const auto& y : base) {
      const double d = y[dim] - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    const double var = m2 / (n - 1.0);
    m2 /= n;
    m4 /= n;
    check.var_y = var;
    check.se_var_y = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  }

  // Expected conditional variance from the per-zeta groups; each outer draw
  // carries equal weight under the zeta marginal that produced it.
  {
    const std::size_t m = draws.y_draws_per_zeta.size();
    std::vector<double> group_vars(m);
    for (std::size_t i = 0; i < m; ++i) {
      group_vars[i] = sample_variance(draws.y_draws_per_zeta[i], dim);
    }
    double mean_v = 0.0;
    for (double v : group_vars) mean_v += v;
    mean_v /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : group_vars) ss += (v - mean_v) * (v - mean_v);
    const double sd_v = std::sqrt(ss / static_cast<double>(m - 1));
    check.expected_cond_var = mean_v;
    check.se_expected_cond_var = sd_v / std::sqrt(static_cast<double>(m));
  }

  check.gap = check.var_y - check.expected_cond_var;
  check.se_gap = std::sqrt(check.se_var_y * check.se_var_y +
                           check.se_expected_cond_var * check.se_expected_cond_var);
  check.verdict = verdict_from_gap(check.gap, check.se_gap);
  check.equality_flagged = std::abs(check.gap) < 3.0 * check.se_gap;
  return check;
}

DetCheck check_total_covariance_det(const PairedDraws& draws, std::uint64_t bootstrap_seed,
                                    std::size_t bootstrap_replicates) {
  require_shapes(draws);
  const std::size_t dim = draws.y_draws_per_zeta.front().front().size();
  const std::size_t m = draws.y_draws_per_zeta.size();
  const std::size_t n_base = draws.base_y_draws.size();

  DetCheck check;
  check.det_cov_y = determinant(covariance_matrix(draws.base_y_draws, dim), dim);
  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;
  check.det_expected_cond_cov =
      determinant(mean_group_covariance(draws.y_draws_per_zeta, all, dim), dim);
  check.gap = check.det_cov_y - check.det_expected_cond_cov;
  check.singular_estimate =
      check.det_cov_y < 1e-12 || check.det_expected_cond_cov < 1e-12;

  RngStream rng(derive_seed(bootstrap_seed, 0xB0075ULL));
  std::vector<double> gaps;
  gaps.reserve(bootstrap_replicates);
  for (std::size_t b = 0; b < bootstrap_replicates; ++b) {
    const std::vector<std::size_t> base_idx = bootstrap_indices(n_base, rng);
    std::vector<std::vector<double>> base_resampled;
    base_resampled.reserve(n_base);
    for (std::size_t i : base_idx) base_resampled.push_back(draws.base_y_draws[i]);
    const double det_base = determinant(covariance_matrix(base_resampled, dim), dim);
    const std::vector<std::size_t> outer_idx = bootstrap_indices(m, rng);
    const double det_inner =
        determinant(mean_group_covariance(draws.y_draws_per_zeta, outer_idx, dim), dim);
    gaps.push_back(det_base - det_inner);
  }
  double mean_gap = 0.0;
  for (double g : gaps) mean_gap += g;
  mean_gap /= static_cast<double>(gaps.size());
  double ss = 0.0;
  for (double g : gaps) ss += (g - mean_gap) * (g - mean_gap);
  check.se_gap = std::sqrt(ss / static_cast<double>(gaps.size() - 1));

  check.verdict = verdict_from_gap(check.gap, check.se_gap);
  return check;
}

StructureCheck check_factorization_structure(
    const std::vector<std::vector<int>>& model_links,
    const std::vector<std::vector<int>>& evidence_links) {
  if (model_links.size() != evidence_links.size()) {
    throw DimensionMismatch("check_factorization_structure: link maps disagree on the "
                            "number of y components");
  }
  StructureCheck check;
  const std::size_t d = model_links.size();
  if (d <= 1) {
    check.applicable = false;
    check.verdict = Verdict::Pass;
    check.note = "structure conditions are trivially satisfied for one-dimensional "
                 "x, y and zeta";
    return check;
  }
  check.applicable = true;
  std::set<int> seen_x;
  std::set<int> seen_zeta;
  for (std::size_t i = 0; i < d; ++i) {
    if (model_links[i].size() != 1) {
      check.verdict = Verdict::Fail;
      check.note = "y_" + std::to_string(i) + " must depend on exactly one x component";
      return check;
    }
    if (evidence_links[i].size() != 1) {
      check.verdict = Verdict::Fail;
      check.note = "y_" + std::to_string(i) + " must link to exactly one zeta component";
      return check;
    }
    if (!seen_x.insert(model_links[i][0]).second) {
      check.verdict = Verdict::Fail;
      check.note = "two y components share the x parent " +
                   std::to_string(model_links[i][0]);
      return check;
    }
    if (!seen_zeta.insert(evidence_links[i][0]).second) {
      check.verdict = Verdict::Fail;
      check.note = "two y components share the zeta component " +
                   std::to_string(evidence_links[i][0]);
      return check;
    }
  }
  check.verdict = Verdict::Pass;
  check.note = "each y component has a unique x parent and a unique zeta component";
  return check;
}

std::string condition1_note_text() {
  return "The existence condition (a p(zeta|y) reproducing q exactly) is not checked: "
         "it is generally intractable to assess from draws. The conjugate Gaussian "
         "family is the one case here with an explicit witness, produced by "
         "consistency_construction.";
}

ConsistencyReport run_consistency_checks(const PairedDraws& draws,
                                         const std::vector<std::vector<int>>& model_links,
                                         const std::vector<std::vector<int>>& evidence_links,
                                         std::uint64_t bootstrap_seed) {
  require_shapes(draws);
  ConsistencyReport report;
  const std::size_t dim = draws.y_draws_per_zeta.front().front().size();
  for (std::size_t d = 0; d < dim; ++d) {
    report.scalar_checks.push_back(check_total_variance_scalar(draws, d));
  }
  report.det_check = check_total_covariance_det(draws, bootstrap_seed);
  report.structure_check = check_factorization_structure(model_links, evidence_links);
  report.condition1_note = condition1_note_text();
  return report;
}

nlohmann::json to_json(const ScalarCheck& check) {
  return {{"dim", check.dim},
          {"var_y", check.var_y},
          {"expected_cond_var", check.expected_cond_var},
          {"gap", check.gap},
          {"se_var_y", check.se_var_y},
          {"se_expected_cond_var", check.se_expected_cond_var},
          {"se_gap", check.se_gap},
          {"verdict", to_string(check.verdict)},
          {"equality_flagged", check.equality_flagged}};
}

nlohmann::json to_json(const DetCheck& check) {
  return {{"det_cov_y", check.det_cov_y},
          {"det_expected_cond_cov", check.det_expected_cond_cov},
          {"gap", check.gap},
          {"se_gap", check.se_gap},
          {"verdict", to_string(check.verdict)},
          {"singular_estimate", check.singular_estimate}};
}

nlohmann::json to_json(const StructureCheck& check) {
  return {{"applicable", check.applicable},
          {"verdict", to_string(check.verdict)},
          {"note", check.note}};
}

nlohmann::json to_json(const ConsistencyReport& report) {
  nlohmann::json scalar = nlohmann::json::array();
  for (const auto& check : report.scalar_checks) scalar.push_back(to_json(check));
  return {{"scalar_checks", scalar},
          {"det_check", to_json(report.det_check)},
          {"structure_check", to_json(report.structure_check)},
          {"condition1_note", report.condition1_note}};
}

PairedDraws gaussian_paired_draws(const GaussianChain& chain, double sigma_q,
                                  std::size_t m, std::size_t k, std::size_t n_base,
                                  std::uint64_t seed) {
  if (m < 2 || k < 2 || n_base < 2) {
    throw TooFewDraws("gaussian_paired_draws: need m, k, n_base >= 2");
  }
  const double var_y = chain.prior.variance + chain.obs_noise_sd * chain.obs_noise_sd;
  const double sigma_zeta_sq = var_y - sigma_q * sigma_q;

  PairedDraws draws;
  draws.zeta_draws.reserve(m);
  {
    RngStream rng(derive_seed(seed, 0));
    if (sigma_zeta_sq >= 0.0) {
      const double sd = std::sqrt(sigma_zeta_sq);
      for (std::size_t i = 0; i < m; ++i) {
        draws.zeta_draws.push_back({rng.normal(chain.prior.mean, std::max(sd, 1e-300))});
      }
    } else {
      // No witness marginal exists; place zeta draws on the model's predictive.
      for (std::size_t i = 0; i < m; ++i) {
        const double x = rng.normal(chain.prior.mean, chain.prior.sd());
        draws.zeta_draws.push_back({rng.normal(x, chain.obs_noise_sd)});
      }
    }
  }
  {
    RngStream rng(derive_seed(seed, 1));
    draws.y_draws_per_zeta.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      auto& group = draws.y_draws_per_zeta[i];
      group.reserve(k);
      for (std::size_t j = 0; j < k; ++j) {
        group.push_back({rng.normal(draws.zeta_draws[i][0], sigma_q)});
      }
    }
  }
  {
    RngStream rng(derive_seed(seed, 2));
    draws.base_y_draws.reserve(n_base);
    for (std::size_t i = 0; i < n_base; ++i) {
      const double x = rng.normal(chain.prior.mean, chain.prior.sd());
      draws.base_y_draws.push_back({rng.normal(x, chain.obs_noise_sd)});
    }
  }
  return draws;
}

PairedDraws fixed_zeta_paired_draws(const BaseModel& model, const Density& q,
                                    double zeta_value, std::size_t m, std::size_t k,
                                    std::size_t n_base, std::uint64_t seed) {
  if (m < 2 || k < 2 || n_base < 2) {
    throw TooFewDraws("fixed_zeta_paired_draws: need m, k, n_base >= 2");
  }
  PairedDraws draws;
  draws.zeta_draws.assign(m, {zeta_value});
  {
    RngStream rng(derive_seed(seed, 1));
    draws.y_draws_per_zeta.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      auto& group = draws.y_draws_per_zeta[i];
      group.reserve(k);
      for (std::size_t j = 0; j < k; ++j) group.push_back(q.sample(rng));
    }
  }
  {
    RngStream rng(derive_seed(seed, 2));
    draws.base_y_draws.reserve(n_base);
    for (std::size_t i = 0; i < n_base; ++i) {
      const Point x = model.prior.sample(rng);
      draws.base_y_draws.push_back(model.likelihood(x).sample(rng));
    }
  }
  return draws;
}

}  // namespace uev
