#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "uev/errors.hpp"

namespace {

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw uev::DomainError("cannot parse '" + item + "' as a number in list '" + text +
                             "'");
    }
  }
  if (values.empty()) {
    throw uev::DomainError("empty number list");
  }
  return values;
}

std::vector<std::vector<double>> parse_csv_lists(const std::vector<std::string>& lists) {
  std::vector<std::vector<double>> out;
  out.reserve(lists.size());
  for (const auto& text : lists) out.push_back(parse_csv_doubles(text));
  return out;
}

/// Chain-model flags shared by `gaussian` and `check-consistency`. Presets
/// apply first; explicitly given flags then override individual values.
struct GaussianFlags {
  CLI::Option* panel = nullptr;
  CLI::Option* mu_x = nullptr;
  CLI::Option* sigma_x = nullptr;
  CLI::Option* sigma_yx = nullptr;
  CLI::Option* sigma_q = nullptr;
  CLI::Option* zeta = nullptr;
  std::string panel_value = "left";
  double mu_x_value = 0.0;
  double sigma_x_value = 0.0;
  double sigma_yx_value = 0.0;
  double sigma_q_value = 0.0;
  double zeta_value = 0.0;

  void attach(CLI::App* cmd) {
    panel = cmd->add_option("--panel", panel_value, "Preset parameter set: left or right");
    mu_x = cmd->add_option("--mu-x", mu_x_value, "Prior mean of x");
    sigma_x = cmd->add_option("--sigma-x", sigma_x_value, "Prior sd of x");
    sigma_yx = cmd->add_option("--sigma-yx", sigma_yx_value, "Observation noise sd");
    sigma_q = cmd->add_option("--sigma-q", sigma_q_value, "Evidence sd");
    zeta = cmd->add_option("--zeta", zeta_value, "Evidence location");
  }

  void apply(uev::cli::GaussianConfig& config) const {
    config.panel = panel->count() ? panel_value : "left";
    uev::cli::resolve_panel(config);
    if (mu_x->count()) config.mu_x = mu_x_value;
    if (sigma_x->count()) config.sigma_x = sigma_x_value;
    if (sigma_yx->count()) config.sigma_yx = sigma_yx_value;
    if (sigma_q->count()) config.sigma_q = sigma_q_value;
    if (zeta->count()) config.zeta = zeta_value;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uev: Bayesian inference under uncertain evidence (Jeffrey's rule, "
               "virtual evidence, distributional evidence)"};
  app.require_subcommand(1);

  uev::cli::GaussianConfig gaussian;
  GaussianFlags gaussian_flags;
  auto* gaussian_cmd =
      app.add_subcommand("gaussian", "Closed-form conjugate-chain comparison of the "
                                     "three update rules");
  gaussian_flags.attach(gaussian_cmd);
  double sigma_qzeta_flag = 0.0;
  auto* sqz_opt = gaussian_cmd->add_option(
      "--sigma-qzeta", sigma_qzeta_flag,
      "Virtual-likelihood sd (defaults to sigma-q, the symmetric flip)");
  gaussian_cmd->add_option("--method", gaussian.method,
                           "jeffrey | virtual | distributional | all");
  gaussian_cmd->add_flag("--mc-check", gaussian.mc_check,
                         "Cross-check the closed forms with the sampling engines");
  gaussian_cmd->add_option("--n", gaussian.n, "Monte Carlo draw budget");
  gaussian_cmd->add_option("--seed", gaussian.seed, "Master seed");
  gaussian_cmd->add_option("--out", gaussian.out_prefix, "Output file prefix");

  uev::cli::BallDropConfig ball;
  auto* ball_cmd = app.add_subcommand(
      "ball-drop", "Infer gravitational acceleration from one uncertain fall time");
  ball_cmd->add_option("--t-hat", ball.t_hat, "Recorded stopwatch time [s]");
  ball_cmd->add_option("--sigma-q", ball.sigma_q, "Stopwatch error sd [s]");
  ball_cmd->add_option("--sigma-model", ball.sigma_model, "Model error sd [s]");
  ball_cmd->add_option("--distance", ball.distance, "Drop distance [m]");
  ball_cmd->add_option("--prior-mean", ball.prior_mean, "Prior mean of g");
  ball_cmd->add_option("--prior-sd", ball.prior_sd, "Prior sd of g");
  ball_cmd->add_option("--method", ball.method,
                       "jeffrey | virtual | distributional | all");
  ball_cmd->add_option("--engine", ball.engine, "snis | mh");
  ball_cmd->add_option("--n", ball.n,
                       "Draw budget (the Jeffrey mixture divides it across components)");
  ball_cmd->add_option("--n-e", ball.n_e, "Inner / expectation draw count");
  ball_cmd->add_option("--seed", ball.seed, "Master seed");
  ball_cmd->add_flag("--strict", ball.strict,
                     "Exit with code 4 when a consistency check fails");
  ball_cmd->add_option("--out", ball.out_prefix, "Output file prefix");

  uev::cli::DiscreteConfig discrete;
  std::vector<std::string> q_lists;
  std::vector<std::string> lambda_lists;
  auto* discrete_cmd = app.add_subcommand(
      "discrete", "Exact table updates: Jeffrey, virtual, correspondence, commutativity");
  discrete_cmd->add_option("--table", discrete.table_path,
                           "JointTable JSON file (defaults to the built-in example)");
  discrete_cmd->add_option("--q", q_lists,
                           "Evidence marginal over y, e.g. 0.1,0.9 (repeatable)");
  discrete_cmd->add_option("--lambda", lambda_lists,
                           "Likelihood ratios over y, e.g. 1,2 (repeatable)");
  discrete_cmd->add_option("--out", discrete.out_prefix, "Output file prefix");

  uev::cli::CheckConsistencyConfig check;
  GaussianFlags check_flags;
  auto* check_cmd = app.add_subcommand(
      "check-consistency", "Moment and structure diagnostics for Jeffrey updates");
  check_cmd->add_option("--experiment", check.experiment, "gaussian | ball-drop");
  check_flags.attach(check_cmd);
  auto* check_t_hat =
      check_cmd->add_option("--t-hat", check.ball_drop.t_hat, "Recorded time [s]");
  check_cmd->add_option("--prior-mean", check.ball_drop.prior_mean, "Prior mean of g");
  check_cmd->add_option("--prior-sd", check.ball_drop.prior_sd, "Prior sd of g");
  check_cmd->add_option("--m", check.m, "Outer zeta draws");
  check_cmd->add_option("--k", check.k, "Inner y draws per zeta");
  check_cmd->add_option("--n-base", check.n_base, "Base-model predictive draws");
  check_cmd->add_option("--seed", check.seed, "Master seed");
  check_cmd->add_flag("--strict", check.strict, "Exit with code 4 on a fail verdict");
  check_cmd->add_option("--out", check.out_prefix, "Output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gaussian_cmd->parsed()) {
      gaussian_flags.apply(gaussian);
      if (sqz_opt->count() > 0) gaussian.sigma_qzeta = sigma_qzeta_flag;
      return uev::cli::run_gaussian(gaussian);
    }
    if (ball_cmd->parsed()) {
      return uev::cli::run_ball_drop(ball);
    }
    if (discrete_cmd->parsed()) {
      discrete.qs = parse_csv_lists(q_lists);
      discrete.lambdas = parse_csv_lists(lambda_lists);
      return uev::cli::run_discrete(discrete);
    }
    if (check_cmd->parsed()) {
      check_flags.apply(check.gaussian);
      // The evidence-sd flag doubles as the stopwatch error for ball-drop checks.
      if (check_flags.sigma_q->count()) {
        check.ball_drop.sigma_q = check_flags.sigma_q_value;
      }
      return uev::cli::run_check_consistency(check);
    }
  } catch (const uev::AllWeightsZero& e) {
    std::fprintf(stderr, "inference failure: %s\n", e.what());
    return 3;
  } catch (const uev::InitOffSupport& e) {
    std::fprintf(stderr, "inference failure: %s\n", e.what());
    return 3;
  } catch (const uev::DegenerateEvidence& e) {
    std::fprintf(stderr, "inference failure: %s\n", e.what());
    return 3;
  } catch (const uev::NormalizerUnavailable& e) {
    std::fprintf(stderr, "inference failure: %s\n", e.what());
    return 3;
  } catch (const uev::Error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
