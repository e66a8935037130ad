#include "uev/dispatch.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "uev/errors.hpp"
#include "uev/rng.hpp"

namespace uev {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_dimensions(const BaseModel& model, const Evidence& evidence) {
  switch (evidence.tag()) {
    case EvidenceTag::Exact:
      if (static_cast<int>(evidence.as_exact().value.size()) != model.dimension_y) {
        throw DimensionMismatch("dispatch_infer: exact evidence dimension " +
                                std::to_string(evidence.as_exact().value.size()) +
                                " does not match observable dimension " +
                                std::to_string(model.dimension_y));
      }
      break;
    case EvidenceTag::TypeI:
      if (evidence.as_type1().q.dimension != model.dimension_y) {
        throw DimensionMismatch("dispatch_infer: type I density dimension mismatch");
      }
      break;
    case EvidenceTag::TypeII:
      if (evidence.as_type2().q.dimension != model.dimension_y) {
        throw DimensionMismatch("dispatch_infer: type II density dimension mismatch");
      }
      break;
    case EvidenceTag::TypeIII:
      break;  // the likelihood is opaque; dimension surfaces on evaluation
  }
}

std::size_t find_y_index(const JointTable& table, double y) {
  const auto& ys = table.y_values();
  for (std::size_t k = 0; k < ys.size(); ++k) {
    if (std::abs(y - ys[k]) <= 1e-9 * std::max(1.0, std::abs(ys[k]))) return k;
  }
  throw DomainError("dispatch_infer: observed y = " + std::to_string(y) +
                    " is not in the table's y support");
}

/// Evidence density evaluated over the table's y atoms as a mass function.
std::vector<double> mass_over_atoms(const Density& q, const JointTable& table) {
  if (q.support.kind != SupportKind::FiniteSet) {
    throw UnsupportedCombination("dispatch_infer: discrete-exact needs evidence with "
                                 "finite support over the table's y values");
  }
  std::vector<double> mass(table.num_y(), 0.0);
  for (std::size_t k = 0; k < table.num_y(); ++k) {
    const double lp = q.log_pdf(Point{table.y_values()[k]});
    mass[k] = lp == kNegInf ? 0.0 : std::exp(lp);
  }
  return mass;
}

Posterior analytic_dispatch(const BaseModel& model, const Evidence& evidence) {
  if (!model.gaussian_chain) {
    throw UnsupportedCombination("dispatch_infer: analytic-gaussian engine requires a "
                                 "model in the recognized conjugate-Gaussian family");
  }
  const GaussianChain& chain = *model.gaussian_chain;
  switch (evidence.tag()) {
    case EvidenceTag::Exact:
      return Posterior(exact_posterior(chain, evidence.as_exact().value.at(0)));
    case EvidenceTag::TypeI: {
      const auto& ev = evidence.as_type1();
      if (!ev.q.gaussian) {
        throw UnsupportedCombination("dispatch_infer: analytic Jeffrey update requires "
                                     "Gaussian evidence");
      }
      return Posterior(jeffrey_posterior_gaussian(chain, ev.q.gaussian->mean,
                                                  ev.q.gaussian->sd()));
    }
    case EvidenceTag::TypeII: {
      const auto& ev = evidence.as_type2();
      if (!ev.q.gaussian) {
        throw UnsupportedCombination("dispatch_infer: analytic distributional update "
                                     "requires Gaussian evidence");
      }
      return Posterior(distributional_posterior_gaussian(chain, ev.q.gaussian->mean,
                                                         ev.q.gaussian->sd()));
    }
    case EvidenceTag::TypeIII: {
      const auto& ev = evidence.as_type3();
      if (!ev.gaussian_in_y) {
        throw UnsupportedCombination("dispatch_infer: analytic virtual update requires a "
                                     "Gaussian zeta likelihood");
      }
      return Posterior(virtual_posterior_gaussian(chain, ev.gaussian_in_y->mean,
                                                  ev.gaussian_in_y->sd()));
    }
  }
  throw Error("dispatch_infer: unreachable");
}

Posterior discrete_dispatch(const BaseModel& model, const Evidence& evidence) {
  if (!model.table) {
    throw UnsupportedCombination("dispatch_infer: discrete-exact engine requires a "
                                 "finite table model");
  }
  const JointTable& table = *model.table;
  switch (evidence.tag()) {
    case EvidenceTag::Exact: {
      const std::size_t k = find_y_index(table, evidence.as_exact().value.at(0));
      const std::vector<double> marg = table.y_marginal();
      if (!(marg[k] > 0.0)) {
        throw ZeroMarginal("dispatch_infer: observed y has zero marginal probability");
      }
      std::vector<double> row(table.num_x());
      for (std::size_t j = 0; j < table.num_x(); ++j) row[j] = table.prob(k, j);
      return Posterior(make_table_posterior(table.x_values(), std::move(row)));
    }
    case EvidenceTag::TypeI: {
      const std::vector<double> q = mass_over_atoms(evidence.as_type1().q, table);
      return Posterior(make_table_posterior(table.x_values(),
                                            jeffrey_update_table(table, q)));
    }
    case EvidenceTag::TypeII: {
      // The pseudo-likelihood expectation is exact on finite support:
      // log f(x_j) = sum_k q_k ln p(y_k | x_j).
      const std::vector<double> q = mass_over_atoms(evidence.as_type2().q, table);
      const std::vector<double> x_marg = table.x_marginal();
      std::vector<double> log_post(table.num_x(), kNegInf);
      for (std::size_t j = 0; j < table.num_x(); ++j) {
        if (!(x_marg[j] > 0.0)) continue;
        double acc = std::log(x_marg[j]);
        for (std::size_t k = 0; k < table.num_y() && acc != kNegInf; ++k) {
          if (q[k] == 0.0) continue;
          const double lik = table.prob(k, j) / x_marg[j];
          acc = lik > 0.0 ? acc + q[k] * std::log(lik) : kNegInf;
        }
        log_post[j] = acc;
      }
      double max_lp = kNegInf;
      for (double lp : log_post) max_lp = std::max(max_lp, lp);
      if (max_lp == kNegInf) {
        throw DegenerateEvidence("dispatch_infer: distributional evidence places all "
                                 "its mass outside the model's support");
      }
      std::vector<double> post(table.num_x());
      for (std::size_t j = 0; j < table.num_x(); ++j) {
        post[j] = log_post[j] == kNegInf ? 0.0 : std::exp(log_post[j] - max_lp);
      }
      return Posterior(make_table_posterior(table.x_values(), std::move(post)));
    }
    case EvidenceTag::TypeIII: {
      const auto& ev = evidence.as_type3();
      LikelihoodRatios ratios;
      ratios.lambdas.resize(table.num_y());
      for (std::size_t k = 0; k < table.num_y(); ++k) {
        const double ll = ev.zeta_log_lik(Point{table.y_values()[k]});
        ratios.lambdas[k] = ll == kNegInf ? 0.0 : std::exp(ll);
      }
      return Posterior(make_table_posterior(table.x_values(),
                                            virtual_update_table(table, ratios)));
    }
  }
  throw Error("dispatch_infer: unreachable");
}

Posterior sampling_dispatch(const BaseModel& model, const Evidence& evidence,
                            const EngineConfig& engine) {
  switch (evidence.tag()) {
    case EvidenceTag::Exact: {
      const Point y = evidence.as_exact().value;
      const auto target = [&model, y](const Point& x) { return log_joint(model, x, y); };
      if (engine.engine == EngineKind::Snis) {
        return Posterior(snis(target, model.prior,
                              engine.n, derive_seed(engine.seed, 1)));
      }
      RngStream init_rng(derive_seed(engine.seed, 0));
      Point init;
      bool found = false;
      for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
        init = model.prior.sample(init_rng);
        found = std::isfinite(target(init));
      }
      if (!found) {
        throw InitOffSupport("dispatch_infer: no prior draw has finite joint density at "
                             "the observed y");
      }
      EngineConfig child = engine;
      child.seed = derive_seed(engine.seed, 1);
      MhResult run = mh(target, init, child);
      std::vector<double> lw(run.draws.size(),
                             -std::log(static_cast<double>(run.draws.size())));
      return Posterior(WeightedSamples(std::move(run.draws), std::move(lw), engine.seed));
    }
    case EvidenceTag::TypeI:
      return Posterior(jeffrey_mixture_infer(model, evidence.as_type1().q, engine));
    case EvidenceTag::TypeII:
      return Posterior(distributional_infer(model, evidence.as_type2().q, engine,
                                            DistributionalMode::Pseudo));
    case EvidenceTag::TypeIII:
      return Posterior(virtual_infer(model, evidence.as_type3().zeta_log_lik, engine));
  }
  throw Error("dispatch_infer: unreachable");
}

}  // namespace

Posterior dispatch_infer(const BaseModel& model, const Evidence& evidence,
                         const EngineConfig& engine) {
  if (engine.n_e < 1) {
    throw BudgetTooSmall("dispatch_infer: n_e must be at least 1");
  }
  if (engine.n < 1) {
    throw BudgetTooSmall("dispatch_infer: n must be at least 1");
  }
  require_dimensions(model, evidence);
  switch (engine.engine) {
    case EngineKind::AnalyticGaussian:
      return analytic_dispatch(model, evidence);
    case EngineKind::DiscreteExact:
      return discrete_dispatch(model, evidence);
    case EngineKind::Snis:
    case EngineKind::Mh:
      return sampling_dispatch(model, evidence, engine);
  }
  throw Error("dispatch_infer: unreachable");
}

}  // namespace uev
