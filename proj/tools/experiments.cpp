#include "experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "uev/consistency.hpp"
#include "uev/discrete.hpp"
#include "uev/errors.hpp"
#include "uev/evidence.hpp"
#include "uev/gaussian.hpp"
#include "uev/model.hpp"
#include "uev/montecarlo.hpp"
#include "uev/rng.hpp"

namespace uev::cli {

namespace {

using nlohmann::ordered_json;

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) {
    throw DomainError("cannot open output file " + path);
  }
  out << content;
}

std::string csv_preamble(const std::string& timestamp, const ordered_json& config) {
  return "# timestamp: " + timestamp + "\n# config: " + config.dump() + "\n";
}

std::vector<std::string> methods_for(const std::string& method) {
  if (method == "all") return {"jeffrey", "virtual", "distributional"};
  if (method == "jeffrey" || method == "virtual" || method == "distributional") {
    return {method};
  }
  throw DomainError("unknown method '" + method +
                    "'; expected jeffrey, virtual, distributional or all");
}

[[noreturn]] void rethrow_labeled(const Error& e, const std::string& method) {
  const std::string msg = "method " + method + ": " + e.what();
  if (dynamic_cast<const AllWeightsZero*>(&e)) throw AllWeightsZero(msg);
  if (dynamic_cast<const InitOffSupport*>(&e)) throw InitOffSupport(msg);
  if (dynamic_cast<const DegenerateEvidence*>(&e)) throw DegenerateEvidence(msg);
  if (dynamic_cast<const NormalizerUnavailable*>(&e)) throw NormalizerUnavailable(msg);
  if (dynamic_cast<const BudgetTooSmall*>(&e)) throw BudgetTooSmall(msg);
  throw DomainError(msg);
}

bool report_has_failure(const ConsistencyReport& report) {
  for (const auto& check : report.scalar_checks) {
    if (check.verdict == Verdict::Fail) return true;
  }
  if (report.det_check.verdict == Verdict::Fail) return true;
  return report.structure_check.applicable &&
         report.structure_check.verdict == Verdict::Fail;
}

}  // namespace

void resolve_panel(GaussianConfig& config) {
  if (config.panel == "left") {
    config.mu_x = 1.0;
    config.sigma_x = 1.0;
    config.sigma_yx = 0.3;
    config.sigma_q = 1.0;
    config.zeta = 2.0;
  } else if (config.panel == "right") {
    config.mu_x = 0.0;
    config.sigma_x = 5.0;
    config.sigma_yx = 0.5;
    config.sigma_q = 0.5;
    config.zeta = 2.0;
  } else if (config.panel != "custom") {
    throw DomainError("unknown panel '" + config.panel + "'; expected left, right or custom");
  }
}

int run_gaussian(const GaussianConfig& config) {
  if (!(config.sigma_x > 0.0) || !(config.sigma_yx > 0.0) || !(config.sigma_q > 0.0)) {
    throw DomainError("gaussian experiment: all standard deviations must be positive");
  }
  const double sigma_qzeta = config.sigma_qzeta.value_or(config.sigma_q);
  if (!(sigma_qzeta > 0.0)) {
    throw DomainError("gaussian experiment: sigma_qzeta must be positive");
  }
  const std::vector<std::string> methods = methods_for(config.method);

  ordered_json config_json{{"experiment", "gaussian"},
                           {"panel", config.panel},
                           {"mu_x", config.mu_x},
                           {"sigma_x", config.sigma_x},
                           {"sigma_yx", config.sigma_yx},
                           {"sigma_q", config.sigma_q},
                           {"zeta", config.zeta},
                           {"sigma_qzeta", sigma_qzeta},
                           {"method", config.method},
                           {"mc_check", config.mc_check},
                           {"n", config.n},
                           {"seed", config.seed}};

  const GaussianChain chain{{config.mu_x, config.sigma_x * config.sigma_x},
                            config.sigma_yx};
  const auto analytic = [&](const std::string& method) -> GaussianParams {
    if (method == "jeffrey") {
      return jeffrey_posterior_gaussian(chain, config.zeta, config.sigma_q);
    }
    if (method == "virtual") {
      return virtual_posterior_gaussian(chain, config.zeta, sigma_qzeta);
    }
    return distributional_posterior_gaussian(chain, config.zeta, config.sigma_q);
  };

  // Monte Carlo cross-checks run concurrently on derived seeds.
  std::vector<std::optional<WeightedSamples>> mc_runs(methods.size());
  if (config.mc_check) {
    const BaseModel model = make_gaussian_chain_model(chain);
    std::vector<std::future<WeightedSamples>> futures;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const std::string method = methods[i];
      futures.push_back(std::async(std::launch::async, [&, method, i]() {
        EngineConfig engine;
        engine.n = config.n;
        engine.seed = derive_seed(config.seed, 11 + i);
        if (method == "jeffrey") {
          engine.n_e = 256;
          // --n is the total budget; the mixture splits it across components.
          engine.n = std::max<std::size_t>(512, config.n / engine.n_e);
          return jeffrey_mixture_infer(model, normal_density(config.zeta, config.sigma_q),
                                       engine);
        }
        if (method == "virtual") {
          const double zeta = config.zeta;
          const double sd = sigma_qzeta;
          return virtual_infer(
              model, [zeta, sd](const Point& y) { return normal_log_pdf(zeta, y[0], sd); },
              engine);
        }
        engine.n_e = 1000;
        return distributional_infer(model, normal_density(config.zeta, config.sigma_q),
                                    engine, DistributionalMode::Pseudo);
      }));
    }
    for (std::size_t i = 0; i < methods.size(); ++i) {
      try {
        mc_runs[i] = futures[i].get();
      } catch (const Error& e) {
        rethrow_labeled(e, methods[i]);
      }
    }
  }

  const std::string timestamp = iso_timestamp();

  std::string summary = csv_preamble(timestamp, config_json);
  summary += "method,mean,sd,ess,n,seed\n";
  for (const auto& method : methods) {
    const GaussianParams p = analytic(method);
    summary += method + "," + fmt(p.mean) + "," + fmt(p.sd()) + ",0,0," +
               std::to_string(config.seed) + "\n";
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (!mc_runs[i]) continue;
    const WeightedSamples& run = *mc_runs[i];
    summary += methods[i] + "-mc," + fmt(run.mean()) + "," +
               fmt(std::sqrt(run.variance())) + "," + fmt(run.ess()) + "," +
               std::to_string(run.size()) + "," + std::to_string(run.seed()) + "\n";
  }

  ordered_json report{{"timestamp", timestamp}, {"config", config_json}};
  {
    ordered_json posteriors;
    for (const auto& method : methods) {
      const GaussianParams p = analytic(method);
      posteriors[method] = {{"mean", p.mean}, {"sd", p.sd()}, {"variance", p.variance}};
    }
    report["posteriors"] = posteriors;
  }
  if (methods.size() == 3) {
    const GaussianParams pj = analytic("jeffrey");
    const GaussianParams pv = analytic("virtual");
    const GaussianParams pd = analytic("distributional");
    report["pairwise_kl"] = ordered_json::array(
        {{{"pair", "jeffrey||virtual"}, {"kl", gaussian_kl(pj, pv)}},
         {{"pair", "jeffrey||distributional"}, {"kl", gaussian_kl(pj, pd)}},
         {{"pair", "virtual||distributional"}, {"kl", gaussian_kl(pv, pd)}}});
  }
  if (config.mc_check) {
    ordered_json mc;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const WeightedSamples& run = *mc_runs[i];
      mc[methods[i]] = {{"mean", run.mean()},
                        {"sd", std::sqrt(run.variance())},
                        {"mean_se", run.mean_standard_error()},
                        {"ess", run.ess()},
                        {"n", run.size()},
                        {"seed", run.seed()},
                        {"degenerate_weights", run.degenerate_weights()}};
    }
    report["mc_check"] = mc;
  }

  // Density grid over all three posteriors for plotting.
  std::string density = csv_preamble(timestamp, config_json);
  density += "x,jeffrey,virtual,distributional\n";
  {
    const GaussianParams pj = jeffrey_posterior_gaussian(chain, config.zeta, config.sigma_q);
    const GaussianParams pv = virtual_posterior_gaussian(chain, config.zeta, sigma_qzeta);
    const GaussianParams pd =
        distributional_posterior_gaussian(chain, config.zeta, config.sigma_q);
    const double lo = std::min({pj.mean, pv.mean, pd.mean}) -
                      4.0 * std::max({pj.sd(), pv.sd(), pd.sd()});
    const double hi = std::max({pj.mean, pv.mean, pd.mean}) +
                      4.0 * std::max({pj.sd(), pv.sd(), pd.sd()});
    const std::size_t points = 401;
    for (std::size_t i = 0; i < points; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) /
                                static_cast<double>(points - 1);
      density += fmt(x);
      for (const GaussianParams& p : {pj, pv, pd}) {
        density += "," + fmt(std::exp(normal_log_pdf(x, p.mean, p.sd())));
      }
      density += "\n";
    }
  }

  write_file(config.out_prefix + "_summary.csv", summary);
  write_file(config.out_prefix + "_density.csv", density);
  write_file(config.out_prefix + "_report.json", report.dump(2) + "\n");
  return 0;
}

int run_ball_drop(const BallDropConfig& config) {
  if (!(config.distance > 0.0) || !(config.sigma_q > 0.0) ||
      !(config.sigma_model > 0.0) || !(config.prior_sd > 0.0)) {
    throw DomainError("ball-drop experiment: distance and all spreads must be positive");
  }
  if (config.engine != "snis" && config.engine != "mh") {
    throw DomainError("ball-drop experiment: engine must be snis or mh");
  }
  const std::vector<std::string> methods = methods_for(config.method);

  ordered_json config_json{{"experiment", "ball-drop"},
                           {"t_hat", config.t_hat},
                           {"sigma_q", config.sigma_q},
                           {"sigma_model", config.sigma_model},
                           {"distance", config.distance},
                           {"prior_mean", config.prior_mean},
                           {"prior_sd", config.prior_sd},
                           {"method", config.method},
                           {"engine", config.engine},
                           {"n", config.n},
                           {"n_e", config.n_e},
                           {"seed", config.seed},
                           {"strict", config.strict}};

  const BaseModel model = make_ball_drop_model(config.prior_mean, config.prior_sd,
                                               config.distance, config.sigma_model);
  const Density q = normal_density(config.t_hat, config.sigma_q);

  std::vector<std::optional<WeightedSamples>> runs(methods.size());
  {
    std::vector<std::future<WeightedSamples>> futures;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const std::string method = methods[i];
      futures.push_back(std::async(std::launch::async, [&, method, i]() {
        EngineConfig engine;
        engine.engine = config.engine == "mh" ? EngineKind::Mh : EngineKind::Snis;
        engine.n = config.n;
        engine.n_e = config.n_e;
        engine.mh_steps = config.n;
        engine.mh_burn_in = config.n / 10 + 1;
        // One fixed scale serves both the slow g direction and, for virtual
        // evidence, the stiff time coordinate of the extended state.
        engine.mh_step_scale = 0.1;
        engine.seed = derive_seed(config.seed, 21 + i);
        if (method == "jeffrey") {
          // --n is the total budget; the mixture splits it across components.
          engine.n = std::max<std::size_t>(512, config.n / std::max<std::size_t>(1, engine.n_e));
          engine.mh_steps = engine.n;
          engine.mh_burn_in = engine.n / 10 + 1;
          return jeffrey_mixture_infer(model, q, engine);
        }
        if (method == "virtual") {
          // Flip the evidence density into a likelihood of the recorded time.
          const double t_hat = config.t_hat;
          const double sd = config.sigma_q;
          return virtual_infer(
              model,
              [t_hat, sd](const Point& y) { return normal_log_pdf(t_hat, y[0], sd); },
              engine);
        }
        return distributional_infer(model, q, engine, DistributionalMode::Pseudo);
      }));
    }
    for (std::size_t i = 0; i < methods.size(); ++i) {
      try {
        runs[i] = futures[i].get();
      } catch (const Error& e) {
        rethrow_labeled(e, methods[i]);
      }
    }
  }

  // Consistency diagnostics as a sidecar report.
  const PairedDraws draws = fixed_zeta_paired_draws(model, q, config.t_hat, 2000, 50,
                                                    100000, derive_seed(config.seed, 900));
  const ConsistencyReport consistency =
      run_consistency_checks(draws, {{0}}, {{0}}, derive_seed(config.seed, 901));

  const std::string timestamp = iso_timestamp();

  std::string summary = csv_preamble(timestamp, config_json);
  summary += "method,mean,sd,ess,n,seed\n";
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const WeightedSamples& run = *runs[i];
    summary += methods[i] + "," + fmt(run.mean()) + "," + fmt(std::sqrt(run.variance())) +
               "," + fmt(run.ess()) + "," + std::to_string(run.size()) + "," +
               std::to_string(run.seed()) + "\n";
  }

  ordered_json report{{"timestamp", timestamp}, {"config", config_json}};
  report["predictive_time_at_prior_mean"] =
      ball_drop_mean_time(config.prior_mean, config.distance);
  {
    ordered_json per_method;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const WeightedSamples& run = *runs[i];
      const double mean = run.mean();
      const double sd = std::sqrt(run.variance());
      per_method[methods[i]] = {{"mean", mean},
                                {"sd", sd},
                                {"mean_se", run.mean_standard_error()},
                                {"ess", run.ess()},
                                {"n", run.size()},
                                {"seed", run.seed()},
                                {"z_of_g_9_81", (mean - 9.81) / sd},
                                {"degenerate_weights", run.degenerate_weights()}};
    }
    report["methods"] = per_method;
  }
  report["consistency"] = to_json(consistency);

  write_file(config.out_prefix + "_summary.csv", summary);
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const WeightedSamples& run = *runs[i];
    std::string draws_csv = csv_preamble(timestamp, config_json);
    draws_csv += "draw,log_weight\n";
    const auto& pts = run.points();
    const auto& lw = run.log_weights();
    for (std::size_t r = 0; r < pts.size(); ++r) {
      draws_csv += fmt(pts[r][0]) + "," + fmt(lw[r]) + "\n";
    }
    write_file(config.out_prefix + "_draws_" + methods[i] + ".csv", draws_csv);
  }
  write_file(config.out_prefix + "_report.json", report.dump(2) + "\n");
  write_file(config.out_prefix + "_consistency.json",
             ordered_json{{"timestamp", timestamp},
                          {"config", config_json},
                          {"report", to_json(consistency)}}
                     .dump(2) +
                 "\n");

  if (config.strict && report_has_failure(consistency)) return 4;
  return 0;
}

int run_discrete(const DiscreteConfig& raw) {
  DiscreteConfig config = raw;
  std::shared_ptr<JointTable> table;
  if (config.table_path.empty()) {
    // Built-in worked example: p(x=1) = 0.5, p(y=1|x=1) = 0.8, p(y=1|x=0) = 0.2.
    table = std::make_shared<JointTable>(
        std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 1.0},
        std::vector<std::vector<double>>{{0.4, 0.1}, {0.1, 0.4}});
    if (config.qs.empty() && config.lambdas.empty()) {
      config.qs = {{0.1, 0.9}, {0.9, 0.1}};
      config.lambdas = {{1.0, 2.0}};
    }
  } else {
    std::ifstream in(config.table_path);
    if (!in) {
      throw DomainError("cannot read table file " + config.table_path);
    }
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw DomainError("invalid table JSON: " + std::string(e.what()));
    }
    table = std::make_shared<JointTable>(JointTable::from_json(doc));
    if (config.qs.empty() && config.lambdas.empty()) {
      throw DomainError("custom tables need at least one --q or --lambda");
    }
  }

  ordered_json config_json{{"experiment", "discrete"},
                           {"table", config.table_path.empty() ? "builtin" : config.table_path},
                           {"qs", config.qs},
                           {"lambdas", config.lambdas}};

  const std::string timestamp = iso_timestamp();
  ordered_json report{{"timestamp", timestamp}, {"config", config_json}};
  report["x_values"] = table->x_values();
  report["y_marginal"] = table->y_marginal();
  report["prior_x"] = table->x_marginal();

  ordered_json jeffrey_block = ordered_json::array();
  for (const auto& q : config.qs) {
    jeffrey_block.push_back(
        {{"q", q}, {"posterior", jeffrey_update_table(*table, q)}});
  }
  report["jeffrey"] = jeffrey_block;

  ordered_json virtual_block = ordered_json::array();
  for (const auto& lambdas : config.lambdas) {
    virtual_block.push_back(
        {{"lambda", lambdas},
         {"posterior", virtual_update_table(*table, LikelihoodRatios{lambdas})}});
  }
  report["virtual"] = virtual_block;

  if (!config.lambdas.empty()) {
    // Ratios lambda correspond to the Jeffrey marginal q_k proportional to
    // lambda_k p(y_k); both routes must produce the same posterior.
    const auto& lambdas = config.lambdas.front();
    const auto marg = table->y_marginal();
    std::vector<double> implied_q(lambdas.size());
    double total = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      implied_q[k] = lambdas[k] * marg[k];
      total += implied_q[k];
    }
    for (double& v : implied_q) v /= total;
    const auto via_virtual = virtual_update_table(*table, LikelihoodRatios{lambdas});
    const auto via_jeffrey = jeffrey_update_table(*table, implied_q);
    double max_diff = 0.0;
    for (std::size_t j = 0; j < via_virtual.size(); ++j) {
      max_diff = std::max(max_diff, std::abs(via_virtual[j] - via_jeffrey[j]));
    }
    report["correspondence"] = {{"lambda", lambdas},
                                {"implied_q", implied_q},
                                {"virtual_posterior", via_virtual},
                                {"jeffrey_posterior", via_jeffrey},
                                {"max_abs_diff", max_diff}};
  }

  if (config.qs.size() >= 2) {
    const auto& qa = config.qs[0];
    const auto& qb = config.qs[1];
    ordered_json commutativity;
    commutativity["jeffrey_a_then_b"] = sequential_jeffrey(*table, {qa, qb});
    commutativity["jeffrey_b_then_a"] = sequential_jeffrey(*table, {qb, qa});
    // The same two evidences interpreted as likelihood ratios commute.
    const auto marg = table->y_marginal();
    const auto as_ratios = [&](const std::vector<double>& q) {
      LikelihoodRatios r;
      r.lambdas.resize(q.size());
      for (std::size_t k = 0; k < q.size(); ++k) {
        if (marg[k] <= 0.0) {
          throw ZeroMarginal("discrete experiment: evidence hits a zero-marginal y");
        }
        r.lambdas[k] = q[k] / marg[k];
      }
      return r;
    };
    commutativity["virtual_a_then_b"] =
        sequential_virtual(*table, {as_ratios(qa), as_ratios(qb)});
    commutativity["virtual_b_then_a"] =
        sequential_virtual(*table, {as_ratios(qb), as_ratios(qa)});
    report["commutativity"] = commutativity;
  }

  std::string posteriors = csv_preamble(timestamp, config_json);
  posteriors += "x";
  if (!config.qs.empty()) posteriors += ",jeffrey";
  if (!config.lambdas.empty()) posteriors += ",virtual";
  posteriors += "\n";
  {
    std::vector<double> jef;
    std::vector<double> vir;
    if (!config.qs.empty()) jef = jeffrey_update_table(*table, config.qs.front());
    if (!config.lambdas.empty()) {
      vir = virtual_update_table(*table, LikelihoodRatios{config.lambdas.front()});
    }
    for (std::size_t j = 0; j < table->num_x(); ++j) {
      posteriors += fmt(table->x_values()[j]);
      if (!jef.empty()) posteriors += "," + fmt(jef[j]);
      if (!vir.empty()) posteriors += "," + fmt(vir[j]);
      posteriors += "\n";
    }
  }

  write_file(config.out_prefix + "_report.json", report.dump(2) + "\n");
  write_file(config.out_prefix + "_posteriors.csv", posteriors);
  return 0;
}

int run_check_consistency(const CheckConsistencyConfig& config) {
  if (config.m < 2 || config.k < 2 || config.n_base < 2) {
    throw DomainError("check-consistency: m, k and n-base must all be at least 2");
  }

  ordered_json config_json{{"experiment", "check-consistency"},
                           {"target", config.experiment},
                           {"m", config.m},
                           {"k", config.k},
                           {"n_base", config.n_base},
                           {"seed", config.seed},
                           {"strict", config.strict}};

  ordered_json out;
  ConsistencyReport report;
  if (config.experiment == "gaussian") {
    const GaussianConfig& g = config.gaussian;
    const GaussianChain chain{{g.mu_x, g.sigma_x * g.sigma_x}, g.sigma_yx};
    config_json["gaussian"] = {{"panel", g.panel},
                               {"mu_x", g.mu_x},
                               {"sigma_x", g.sigma_x},
                               {"sigma_yx", g.sigma_yx},
                               {"sigma_q", g.sigma_q},
                               {"zeta", g.zeta}};
    try {
      const ConsistencyWitness witness =
          consistency_construction(chain, g.sigma_q, g.zeta);
      out["witness"] = {{"sigma_zeta_sq", witness.sigma_zeta_sq},
                        {"mu_zeta_given_y_at_zeta", witness.mu_zeta_given_y},
                        {"sigma_zeta_given_y_sq", witness.sigma_zeta_given_y_sq}};
    } catch (const InconsistentEvidence& e) {
      out["witness_error"] = e.what();
    }
    const PairedDraws draws = gaussian_paired_draws(chain, g.sigma_q, config.m, config.k,
                                                    config.n_base, config.seed);
    report = run_consistency_checks(draws, {{0}}, {{0}}, derive_seed(config.seed, 1));
  } else if (config.experiment == "ball-drop") {
    const BallDropConfig& b = config.ball_drop;
    const BaseModel model =
        make_ball_drop_model(b.prior_mean, b.prior_sd, b.distance, b.sigma_model);
    config_json["ball_drop"] = {{"t_hat", b.t_hat},
                                {"sigma_q", b.sigma_q},
                                {"sigma_model", b.sigma_model},
                                {"distance", b.distance},
                                {"prior_mean", b.prior_mean},
                                {"prior_sd", b.prior_sd}};
    const PairedDraws draws =
        fixed_zeta_paired_draws(model, normal_density(b.t_hat, b.sigma_q), b.t_hat,
                                config.m, config.k, config.n_base, config.seed);
    report = run_consistency_checks(draws, {{0}}, {{0}}, derive_seed(config.seed, 1));
  } else {
    throw DomainError("check-consistency: experiment must be gaussian or ball-drop");
  }

  ordered_json doc{{"timestamp", iso_timestamp()}, {"config", config_json}};
  for (auto& [key, value] : out.items()) doc[key] = value;
  doc["report"] = to_json(report);
  write_file(config.out_prefix + ".json", doc.dump(2) + "\n");

  if (config.strict && report_has_failure(report)) return 4;
  return 0;
}

}  // namespace uev::cli
