#include "uev/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "uev/errors.hpp"
#include "uev/rng.hpp"

namespace uev {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sub-stream indices under one master seed.
constexpr std::uint64_t kOuterDrawStream = 0;
constexpr std::uint64_t kEngineStreamBase = 1;

void require_budget(bool ok, const std::string& what) {
  if (!ok) throw BudgetTooSmall("budget too small: " + what);
}

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string msg = std::string(e.what()) + " [" + context + "]";
  if (dynamic_cast<const AllWeightsZero*>(&e)) throw AllWeightsZero(msg);
  if (dynamic_cast<const InitOffSupport*>(&e)) throw InitOffSupport(msg);
  if (dynamic_cast<const BudgetTooSmall*>(&e)) throw BudgetTooSmall(msg);
  if (dynamic_cast<const DimensionMismatch*>(&e)) throw DimensionMismatch(msg);
  if (dynamic_cast<const DomainError*>(&e)) throw DomainError(msg);
  throw Error(msg);
}

std::string point_to_string(const Point& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

Point sample_on_support(const Density& density,
                        const std::function<double(const Point&)>& target, RngStream& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Point p = density.sample(rng);
    if (std::isfinite(target(p))) return p;
  }
  throw InitOffSupport("could not find a starting point with finite target density");
}

/// E over the fixed y draws of ln p(y|x); -infinity as soon as one draw falls
/// off the likelihood support.
double pseudo_loglik_given_draws(const BaseModel& model, const std::vector<Point>& ys,
                                 const Point& x) {
  const Density lik = model.likelihood(x);
  double acc = 0.0;
  for (const Point& y : ys) {
    const double lp = lik.log_pdf(y);
    if (lp == kNegInf) return kNegInf;
    acc += lp;
  }
  return acc / static_cast<double>(ys.size());
}

std::vector<Point> draw_pseudo_ys(const Density& q_sampler, std::size_t n_e,
                                  std::uint64_t seed) {
  RngStream rng(derive_seed(seed, kOuterDrawStream));
  std::vector<Point> ys;
  ys.reserve(n_e);
  for (std::size_t j = 0; j < n_e; ++j) ys.push_back(q_sampler.sample(rng));
  return ys;
}

/// Closed influence form of pseudo_total_mean_se for the conjugate chain:
/// g_j = (2 y_j A1 - A2) / (2 sigma^2) with A1 = sum wbar (x - mean) x and
/// A2 = sum wbar (x - mean) x^2.
std::vector<double> conjugate_pseudo_total_se(const std::vector<Point>& ys,
                                              double noise_sd,
                                              const WeightedSamples& samples,
                                              const std::vector<double>& base_se) {
  const double mean = samples.mean(0);
  const auto& w = samples.normalized_weights();
  const auto& pts = samples.points();
  double a1 = 0.0, a2 = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double centered = pts[i][0] - mean;
    a1 += w[i] * centered * pts[i][0];
    a2 += w[i] * centered * pts[i][0] * pts[i][0];
  }
  const double scale = 2.0 * noise_sd * noise_sd;
  const std::size_t n_e = ys.size();
  double gm = 0.0;
  std::vector<double> g(n_e);
  for (std::size_t j = 0; j < n_e; ++j) {
    g[j] = (2.0 * ys[j][0] * a1 - a2) / scale;
    gm += g[j];
  }
  gm /= static_cast<double>(n_e);
  double var = 0.0;
  for (double v : g) var += (v - gm) * (v - gm);
  var /= n_e > 1 ? static_cast<double>(n_e - 1) : 1.0;
  const double inner_var = var / static_cast<double>(n_e);
  return {std::sqrt(base_se[0] * base_se[0] + inner_var)};
}

/// Standard error of the mean of `samples` including the effect of the shared
/// inner draws: linearizing the self-normalized estimator in the per-draw
/// log-likelihood contributions gives, for inner draw j, the influence
/// g_j = sum_i wbar_i (x_i - mean) ln p(y_j|x_i); the inner variance of the
/// mean is then var_j(g) / n_e, added in quadrature to the weight-based term.
std::vector<double> pseudo_total_mean_se(const BaseModel& model,
                                         const std::vector<Point>& ys,
                                         const WeightedSamples& samples,
                                         const std::vector<double>& base_se) {
  const std::size_t dims = samples.points().front().size();
  const std::size_t n_e = ys.size();
  std::vector<double> means(dims);
  for (std::size_t d = 0; d < dims; ++d) means[d] = samples.mean(d);
  std::vector<std::vector<double>> g(n_e, std::vector<double>(dims, 0.0));
  const auto& w = samples.normalized_weights();
  const auto& pts = samples.points();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Density lik = model.likelihood(pts[i]);
    for (std::size_t j = 0; j < n_e; ++j) {
      const double s = lik.log_pdf(ys[j]);
      for (std::size_t d = 0; d < dims; ++d) {
        g[j][d] += w[i] * (pts[i][d] - means[d]) * s;
      }
    }
  }
  std::vector<double> total(dims, 0.0);
  for (std::size_t d = 0; d < dims; ++d) {
    double gm = 0.0;
    for (std::size_t j = 0; j < n_e; ++j) gm += g[j][d];
    gm /= static_cast<double>(n_e);
    double var = 0.0;
    for (std::size_t j = 0; j < n_e; ++j) var += (g[j][d] - gm) * (g[j][d] - gm);
    var /= n_e > 1 ? static_cast<double>(n_e - 1) : 1.0;
    const double inner_var = var / static_cast<double>(n_e);
    total[d] = std::sqrt(base_se[d] * base_se[d] + inner_var);
  }
  return total;
}

}  // namespace

WeightedSamples::WeightedSamples(std::vector<Point> points, std::vector<double> log_weights,
                                 std::uint64_t seed)
    : points_(std::move(points)), log_weights_(std::move(log_weights)), seed_(seed) {
  if (points_.empty() || points_.size() != log_weights_.size()) {
    throw DimensionMismatch("WeightedSamples: points and log_weights must match and be "
                            "non-empty");
  }
  const double max_lw = *std::max_element(log_weights_.begin(), log_weights_.end());
  if (max_lw == kNegInf) {
    throw AllWeightsZero("WeightedSamples: every log-weight is -infinity (no draw lands "
                         "in the target support)");
  }
  norm_weights_.resize(log_weights_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights_.size(); ++i) {
    norm_weights_[i] = std::exp(log_weights_[i] - max_lw);
    total += norm_weights_[i];
  }
  double sum_sq = 0.0;
  for (double& w : norm_weights_) {
    w /= total;
    sum_sq += w * w;
  }
  ess_ = 1.0 / sum_sq;
}

bool WeightedSamples::degenerate_weights() const {
  return ess_ < 0.01 * static_cast<double>(size());
}

double WeightedSamples::mean(std::size_t dim) const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m += norm_weights_[i] * points_[i].at(dim);
  return m;
}

double WeightedSamples::variance(std::size_t dim) const {
  const double m = mean(dim);
  double v = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double d = points_[i].at(dim) - m;
    v += norm_weights_[i] * d * d;
  }
  return v;
}

double WeightedSamples::mean_standard_error(std::size_t dim) const {
  if (dim < total_mean_se_.size()) return total_mean_se_[dim];
  const double m = mean(dim);
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double d = points_[i].at(dim) - m;
    s += norm_weights_[i] * norm_weights_[i] * d * d;
  }
  return std::sqrt(s);
}

void WeightedSamples::set_total_mean_standard_error(std::vector<double> per_dim_se) {
  total_mean_se_ = std::move(per_dim_se);
}

WeightedSamples snis(const std::function<double(const Point&)>& target_log_pdf,
                     const Density& proposal, std::size_t n, std::uint64_t seed) {
  require_budget(n >= 1, "snis requires n >= 1");
  RngStream rng(seed);
  std::vector<Point> points;
  std::vector<double> log_weights;
  points.reserve(n);
  log_weights.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point x = proposal.sample(rng);
    const double lt = target_log_pdf(x);
    log_weights.push_back(lt == kNegInf ? kNegInf : lt - proposal.log_pdf(x));
    points.push_back(std::move(x));
  }
  return WeightedSamples(std::move(points), std::move(log_weights), seed);
}

MhResult mh(const std::function<double(const Point&)>& target_log_pdf, const Point& init,
            const EngineConfig& config) {
  require_budget(config.mh_steps >= 1, "mh requires mh_steps >= 1");
  if (!(config.mh_step_scale > 0.0)) {
    throw DomainError("mh: mh_step_scale must be positive");
  }
  double current_lp = target_log_pdf(init);
  if (!std::isfinite(current_lp)) {
    throw InitOffSupport("mh: target log-density is not finite at init " +
                         point_to_string(init));
  }
  RngStream rng(config.seed);
  Point current = init;
  MhResult result;
  result.seed = config.seed;
  result.draws.reserve(config.mh_steps);
  const std::size_t total = config.mh_burn_in + config.mh_steps;
  std::size_t accepted = 0;
  Point proposal_point(current.size());
  for (std::size_t step = 0; step < total; ++step) {
    for (std::size_t d = 0; d < current.size(); ++d) {
      proposal_point[d] = current[d] + rng.normal(0.0, config.mh_step_scale);
    }
    const double proposal_lp = target_log_pdf(proposal_point);
    if (proposal_lp > current_lp || std::log(rng.uniform()) < proposal_lp - current_lp) {
      current = proposal_point;
      current_lp = proposal_lp;
      ++accepted;
    }
    if (step >= config.mh_burn_in) result.draws.push_back(current);
  }
  result.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
  return result;
}

double batch_means_standard_error(const std::vector<Point>& draws, std::size_t dim,
                                  std::size_t n_batches) {
  if (draws.size() < 2 * n_batches || n_batches < 2) {
    throw TooFewDraws("batch_means_standard_error: need at least two draws per batch");
  }
  const std::size_t batch = draws.size() / n_batches;
  std::vector<double> means(n_batches, 0.0);
  for (std::size_t b = 0; b < n_batches; ++b) {
    for (std::size_t i = 0; i < batch; ++i) means[b] += draws[b * batch + i].at(dim);
    means[b] /= static_cast<double>(batch);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(n_batches);
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= static_cast<double>(n_batches - 1);
  return std::sqrt(var / static_cast<double>(n_batches));
}

WeightedSamples jeffrey_mixture_infer(const BaseModel& model, const Density& q_sampler,
                                      const EngineConfig& config) {
  require_budget(config.n_e >= 1, "jeffrey_mixture_infer requires n_e >= 1");
  if (config.engine != EngineKind::Snis && config.engine != EngineKind::Mh) {
    throw UnsupportedCombination("jeffrey_mixture_infer: engine must be snis or mh");
  }
  // Draw every mixture component up front so component sub-streams do not
  // depend on engine consumption and components can run independently.
  std::vector<Point> ys;
  {
    RngStream outer(derive_seed(config.seed, kOuterDrawStream));
    ys.reserve(config.n_e);
    for (std::size_t j = 0; j < config.n_e; ++j) ys.push_back(q_sampler.sample(outer));
  }

  std::vector<Point> pooled_points;
  std::vector<double> pooled_log_weights;
  std::vector<std::size_t> block_sizes;
  const double log_ne = std::log(static_cast<double>(config.n_e));
  for (std::size_t j = 0; j < config.n_e; ++j) {
    const Point& y = ys[j];
    const auto component_target = [&model, &y](const Point& x) {
      return log_joint(model, x, y);
    };
    const std::uint64_t child_seed = derive_seed(config.seed, kEngineStreamBase + j);
    try {
      if (config.engine == EngineKind::Snis) {
        WeightedSamples run = snis(component_target, model.prior, config.n, child_seed);
        const auto& w = run.normalized_weights();
        for (std::size_t i = 0; i < run.size(); ++i) {
          pooled_points.push_back(run.points()[i]);
          pooled_log_weights.push_back(w[i] > 0.0 ? std::log(w[i]) - log_ne : kNegInf);
        }
        block_sizes.push_back(run.size());
      } else {
        EngineConfig child = config;
        child.seed = child_seed;
        RngStream init_rng(derive_seed(child_seed, kOuterDrawStream));
        const Point init = sample_on_support(model.prior, component_target, init_rng);
        MhResult run = mh(component_target, init, child);
        const double lw = -log_ne - std::log(static_cast<double>(run.draws.size()));
        block_sizes.push_back(run.draws.size());
        for (auto& draw : run.draws) {
          pooled_points.push_back(std::move(draw));
          pooled_log_weights.push_back(lw);
        }
      }
    } catch (const Error& e) {
      rethrow_with_context(e, "mixture component " + std::to_string(j) + ", y = " +
                                  point_to_string(y));
    }
  }
  WeightedSamples pooled(std::move(pooled_points), std::move(pooled_log_weights),
                         config.seed);

  // The pooled mean averages n_e independent component means, so its standard
  // error is the component-level spread; the flat delta method would miss the
  // between-component variance entirely.
  if (config.n_e >= 2) {
    const std::size_t dims = pooled.points().front().size();
    const auto& w = pooled.normalized_weights();
    const auto& pts = pooled.points();
    std::vector<double> se(dims, 0.0);
    for (std::size_t dim = 0; dim < dims; ++dim) {
      std::vector<double> component_means(config.n_e, 0.0);
      std::size_t offset = 0;
      for (std::size_t c = 0; c < config.n_e; ++c) {
        double mass = 0.0, m = 0.0;
        for (std::size_t i = offset; i < offset + block_sizes[c]; ++i) {
          mass += w[i];
          m += w[i] * pts[i][dim];
        }
        component_means[c] = mass > 0.0 ? m / mass : 0.0;
        offset += block_sizes[c];
      }
      double grand = 0.0;
      for (double m : component_means) grand += m;
      grand /= static_cast<double>(config.n_e);
      double var = 0.0;
      for (double m : component_means) var += (m - grand) * (m - grand);
      var /= static_cast<double>(config.n_e - 1);
      se[dim] = std::sqrt(var / static_cast<double>(config.n_e));
    }
    pooled.set_total_mean_standard_error(std::move(se));
  }
  return pooled;
}

WeightedSamples virtual_infer(const BaseModel& model,
                              const std::function<double(const Point&)>& zeta_log_lik,
                              const EngineConfig& config) {
  require_budget(config.n >= 1, "virtual_infer requires n >= 1");
  if (config.engine == EngineKind::Snis) {
    // Ancestral proposal (x, y) ~ p(y|x) p(x); the weight is exactly q(zeta|y).
    RngStream rng(derive_seed(config.seed, kEngineStreamBase));
    std::vector<Point> points;
    std::vector<double> log_weights;
    points.reserve(config.n);
    log_weights.reserve(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
      Point x = model.prior.sample(rng);
      Point y = model.likelihood(x).sample(rng);
      log_weights.push_back(zeta_log_lik(y));
      points.push_back(std::move(x));
    }
    try {
      return WeightedSamples(std::move(points), std::move(log_weights), config.seed);
    } catch (const Error& e) {
      rethrow_with_context(e, "virtual evidence incompatible with the model's "
                              "predictive support");
    }
  }
  if (config.engine != EngineKind::Mh) {
    throw UnsupportedCombination("virtual_infer: engine must be snis or mh");
  }
  // MH over the extended state (x, y).
  const std::size_t dim_x = static_cast<std::size_t>(model.dimension_x);
  const auto extended_target = [&](const Point& state) {
    Point x(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(dim_x));
    Point y(state.begin() + static_cast<std::ptrdiff_t>(dim_x), state.end());
    const double lj = log_joint(model, x, y);
    if (lj == kNegInf) return kNegInf;
    return lj + zeta_log_lik(y);
  };
  RngStream init_rng(derive_seed(config.seed, kOuterDrawStream));
  Point init;
  bool found = false;
  for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
    Point x = model.prior.sample(init_rng);
    Point y = model.likelihood(x).sample(init_rng);
    init = x;
    init.insert(init.end(), y.begin(), y.end());
    found = std::isfinite(extended_target(init));
  }
  if (!found) {
    throw InitOffSupport("virtual_infer: no ancestral draw has finite extended density");
  }
  EngineConfig child = config;
  child.seed = derive_seed(config.seed, kEngineStreamBase);
  MhResult run = mh(extended_target, init, child);
  std::vector<Point> points;
  points.reserve(run.draws.size());
  for (const auto& state : run.draws) {
    points.emplace_back(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(dim_x));
  }
  std::vector<double> log_weights(points.size(),
                                  -std::log(static_cast<double>(points.size())));
  return WeightedSamples(std::move(points), std::move(log_weights), config.seed);
}

double distributional_pseudo_loglik(const BaseModel& model, const Density& q_sampler,
                                    const Point& x, std::size_t n_e, std::uint64_t seed) {
  require_budget(n_e >= 1, "distributional_pseudo_loglik requires n_e >= 1");
  return pseudo_loglik_given_draws(model, draw_pseudo_ys(q_sampler, n_e, seed), x);
}

WeightedSamples distributional_infer(const BaseModel& model, const Density& q_sampler,
                                     const EngineConfig& config, DistributionalMode mode,
                                     std::function<double(const Point&)> log_z) {
  require_budget(config.n >= 1 && config.n_e >= 1,
                 "distributional_infer requires n >= 1 and n_e >= 1");
  if (mode == DistributionalMode::Normalized && !log_z) {
    throw NormalizerUnavailable("distributional_infer: normalized mode requires a Z(x) "
                                "evaluator");
  }
  const std::vector<Point> ys = draw_pseudo_ys(q_sampler, config.n_e, config.seed);

  // For the conjugate chain (likelihood N(x, sigma^2)) the draw expectation
  // has a sufficient-statistic form: mean_j ln N(y_j; x, sigma) =
  // -(vhat + (ybar - x)^2) / (2 sigma^2) - ln(sqrt(2 pi) sigma). This turns
  // the O(n * n_e) inner loop into O(n + n_e).
  const bool conjugate_fast = model.gaussian_chain.has_value() &&
                              model.dimension_x == 1 && model.dimension_y == 1;
  double ybar = 0.0, yvar = 0.0, noise_sd = 1.0;
  if (conjugate_fast) {
    noise_sd = model.gaussian_chain->obs_noise_sd;
    for (const Point& y : ys) ybar += y[0];
    ybar /= static_cast<double>(ys.size());
    for (const Point& y : ys) yvar += (y[0] - ybar) * (y[0] - ybar);
    yvar /= static_cast<double>(ys.size());
  }
  const auto pseudo = [&](const Point& x) {
    double v;
    if (conjugate_fast) {
      const double d = ybar - x[0];
      v = -(yvar + d * d) / (2.0 * noise_sd * noise_sd) - std::log(noise_sd) -
          0.9189385332046727;
    } else {
      v = pseudo_loglik_given_draws(model, ys, x);
    }
    if (mode == DistributionalMode::Normalized && v != kNegInf) v -= log_z(x);
    return v;
  };
  if (config.engine == EngineKind::Snis) {
    // Proposal = prior, so the weight reduces to the (mode-adjusted)
    // pseudo-log-likelihood itself.
    RngStream rng(derive_seed(config.seed, kEngineStreamBase));
    std::vector<Point> points;
    std::vector<double> log_weights;
    points.reserve(config.n);
    log_weights.reserve(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
      Point x = model.prior.sample(rng);
      log_weights.push_back(pseudo(x));
      points.push_back(std::move(x));
    }
    WeightedSamples samples(std::move(points), std::move(log_weights), config.seed);
    const std::size_t dims = samples.points().front().size();
    std::vector<double> delta_se(dims);
    for (std::size_t d = 0; d < dims; ++d) delta_se[d] = samples.mean_standard_error(d);
    samples.set_total_mean_standard_error(
        conjugate_fast ? conjugate_pseudo_total_se(ys, noise_sd, samples, delta_se)
                       : pseudo_total_mean_se(model, ys, samples, delta_se));
    return samples;
  }
  if (config.engine != EngineKind::Mh) {
    throw UnsupportedCombination("distributional_infer: engine must be snis or mh");
  }
  const auto target = [&](const Point& x) {
    const double lp = model.prior.log_pdf(x);
    if (lp == kNegInf) return kNegInf;
    const double ps = pseudo(x);
    return ps == kNegInf ? kNegInf : lp + ps;
  };
  RngStream init_rng(derive_seed(config.seed, kOuterDrawStream + 2));
  const Point init = sample_on_support(model.prior, target, init_rng);
  EngineConfig child = config;
  child.seed = derive_seed(config.seed, kEngineStreamBase);
  MhResult run = mh(target, init, child);
  const std::size_t dims = run.draws.front().size();
  std::vector<double> batch_se(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    batch_se[d] = batch_means_standard_error(run.draws, d);
  }
  std::vector<double> log_weights(run.draws.size(),
                                  -std::log(static_cast<double>(run.draws.size())));
  WeightedSamples samples(std::move(run.draws), std::move(log_weights), config.seed);
  samples.set_total_mean_standard_error(
      conjugate_fast ? conjugate_pseudo_total_se(ys, noise_sd, samples, batch_se)
                     : pseudo_total_mean_se(model, ys, samples, batch_se));
  return samples;
}

}  // namespace uev
