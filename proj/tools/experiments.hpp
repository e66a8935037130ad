#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace uev::cli {

/// Conjugate-chain experiment with the two preset parameter sets ("left",
/// "right") or custom values. sigma_qzeta defaults to sigma_q: the evidence
/// density is symmetric in its two arguments, so flipping it into a virtual
/// likelihood keeps the same scale.
struct GaussianConfig {
  std::string panel = "left";  // left | right | custom
  double mu_x = 1.0;
  double sigma_x = 1.0;
  double sigma_yx = 0.3;
  double sigma_q = 1.0;
  double zeta = 2.0;
  std::optional<double> sigma_qzeta;
  std::string method = "all";  // jeffrey | virtual | distributional | all
  bool mc_check = false;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  std::string out_prefix = "uev_gaussian";
};

/// Applies the preset parameter values when panel is left or right.
void resolve_panel(GaussianConfig& config);

struct BallDropConfig {
  double t_hat = 0.43;
  double sigma_q = 0.03;      // stopwatch error on the true time
  double sigma_model = 0.005; // model error of the fall-time formula
  double distance = 1.0;
  double prior_mean = 9.81;
  double prior_sd = 2.0;
  std::string method = "all";
  std::string engine = "snis";  // snis | mh
  std::size_t n = 100000;
  std::size_t n_e = 256;
  std::uint64_t seed = 1;
  bool strict = false;
  std::string out_prefix = "uev_ball_drop";
};

struct DiscreteConfig {
  std::string table_path;                    // empty: built-in worked example
  std::vector<std::vector<double>> qs;       // evidence marginals over y
  std::vector<std::vector<double>> lambdas;  // likelihood ratio vectors
  std::string out_prefix = "uev_discrete";
};

struct CheckConsistencyConfig {
  std::string experiment = "gaussian";  // gaussian | ball-drop
  GaussianConfig gaussian;
  BallDropConfig ball_drop;
  std::size_t m = 2000;
  std::size_t k = 50;
  std::size_t n_base = 100000;
  std::uint64_t seed = 1;
  bool strict = false;
  std::string out_prefix = "uev_consistency";
};

// Each runner writes its result files and returns the process exit code
// (0, or 4 for a strict consistency failure); configuration and inference
// errors are thrown and mapped to exit codes by the frontend.
int run_gaussian(const GaussianConfig& config);
int run_ball_drop(const BallDropConfig& config);
int run_discrete(const DiscreteConfig& config);
int run_check_consistency(const CheckConsistencyConfig& config);

}  // namespace uev::cli
