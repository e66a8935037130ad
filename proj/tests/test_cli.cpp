#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "experiments.hpp"
#include "uev/errors.hpp"

using namespace uev;
using namespace uev::cli;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_json(const std::string& path) {
  return nlohmann::json::parse(slurp(path));
}

/// Data rows keyed by first column; comment lines and the header are skipped.
std::map<std::string, std::vector<std::string>> csv_rows(const std::string& path) {
  std::map<std::string, std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows[cells.at(0)] = cells;
  }
  return rows;
}

std::string strip_timestamp(const std::string& content) {
  std::istringstream in(content);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# timestamp:", 0) == 0) continue;
    if (line.find("\"timestamp\":") != std::string::npos) continue;
    out << line << "\n";
  }
  return out.str();
}

int run_binary(const std::string& args) {
  const char* bin = std::getenv("UEV_BIN");
  REQUIRE(bin != nullptr);
  const int status = std::system((std::string(bin) + " " + args).c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("run_gaussian reproduces the preset posterior tables") {
  GaussianConfig config;
  config.panel = "left";
  resolve_panel(config);
  config.out_prefix = "cli_out/g_left";
  REQUIRE(run_gaussian(config) == 0);

  const auto rows = csv_rows("cli_out/g_left_summary.csv");
  REQUIRE(rows.size() == 3);  // one row per method
  CHECK(std::stod(rows.at("jeffrey")[1]) == doctest::Approx(1.9174311927).epsilon(1e-6));
  CHECK(std::stod(rows.at("jeffrey")[2]) == doctest::Approx(0.9613785938).epsilon(1e-6));
  CHECK(std::stod(rows.at("virtual")[1]) == doctest::Approx(1.4784688995).epsilon(1e-6));
  CHECK(std::stod(rows.at("virtual")[2]) == doctest::Approx(0.7221711019).epsilon(1e-6));
  CHECK(std::stod(rows.at("distributional")[1]) ==
        doctest::Approx(1.9174311927).epsilon(1e-6));
  CHECK(std::stod(rows.at("distributional")[2]) ==
        doctest::Approx(0.2873478856).epsilon(1e-6));

  const auto report = load_json("cli_out/g_left_report.json");
  REQUIRE(report.at("pairwise_kl").size() == 3);
  for (const auto& entry : report.at("pairwise_kl")) {
    CHECK(entry.at("kl").get<double>() > 0.0);
  }
  CHECK(report.at("config").at("seed") == 1);

  // Density grid columns.
  const std::string density = slurp("cli_out/g_left_density.csv");
  CHECK(density.find("x,jeffrey,virtual,distributional") != std::string::npos);

  GaussianConfig right;
  right.panel = "right";
  resolve_panel(right);
  right.out_prefix = "cli_out/g_right";
  REQUIRE(run_gaussian(right) == 0);
  const auto right_rows = csv_rows("cli_out/g_right_summary.csv");
  CHECK(std::stod(right_rows.at("jeffrey")[1]) ==
        doctest::Approx(1.9801980198).epsilon(1e-6));
  CHECK(std::stod(right_rows.at("jeffrey")[2]) ==
        doctest::Approx(0.7018538059).epsilon(1e-6));
  CHECK(std::stod(right_rows.at("virtual")[2]) ==
        doctest::Approx(0.7001400420).epsilon(1e-6));
  CHECK(std::stod(right_rows.at("distributional")[2]) ==
        doctest::Approx(0.4975185951).epsilon(1e-6));
}

TEST_CASE("run_gaussian method filter yields a single row") {
  GaussianConfig config;
  resolve_panel(config);
  config.method = "jeffrey";
  config.out_prefix = "cli_out/g_single";
  REQUIRE(run_gaussian(config) == 0);
  const auto rows = csv_rows("cli_out/g_single_summary.csv");
  CHECK(rows.size() == 1);
  CHECK(rows.count("jeffrey") == 1);
}

TEST_CASE("gaussian outputs are reproducible apart from timestamps") {
  GaussianConfig config;
  resolve_panel(config);
  config.mc_check = true;
  config.n = 20000;
  config.seed = 99;
  config.out_prefix = "cli_out/g_rep_a";
  REQUIRE(run_gaussian(config) == 0);
  config.out_prefix = "cli_out/g_rep_b";
  REQUIRE(run_gaussian(config) == 0);
  for (const std::string suffix : {"_summary.csv", "_density.csv", "_report.json"}) {
    const std::string a = slurp("cli_out/g_rep_a" + suffix);
    const std::string b = slurp("cli_out/g_rep_b" + suffix);
    CHECK(strip_timestamp(a) == strip_timestamp(b));
  }
}

TEST_CASE("run_gaussian mc-check rows agree with the analytic rows") {
  GaussianConfig config;
  resolve_panel(config);
  config.mc_check = true;
  config.n = 50000;
  config.seed = 4;
  config.out_prefix = "cli_out/g_mc";
  REQUIRE(run_gaussian(config) == 0);
  const auto report = load_json("cli_out/g_mc_report.json");
  for (const std::string method : {"jeffrey", "virtual", "distributional"}) {
    const double analytic = report.at("posteriors").at(method).at("mean").get<double>();
    const auto mc = report.at("mc_check").at(method);
    const double se = mc.at("mean_se").get<double>();
    CHECK(std::abs(mc.at("mean").get<double>() - analytic) < 3.0 * se);
  }
}

TEST_CASE("run_discrete emits the worked-example blocks") {
  DiscreteConfig config;
  config.out_prefix = "cli_out/disc";
  REQUIRE(run_discrete(config) == 0);
  const auto report = load_json("cli_out/disc_report.json");

  const auto commutativity = report.at("commutativity");
  CHECK(commutativity.at("jeffrey_a_then_b")[1].get<double>() ==
        doctest::Approx(0.26).epsilon(1e-12));
  CHECK(commutativity.at("jeffrey_b_then_a")[1].get<double>() ==
        doctest::Approx(0.74).epsilon(1e-12));
  CHECK(commutativity.at("virtual_a_then_b") == commutativity.at("virtual_b_then_a"));

  const auto corr = report.at("correspondence");
  CHECK(corr.at("max_abs_diff").get<double>() < 1e-12);
  CHECK(corr.at("virtual_posterior")[1].get<double>() ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK(corr.at("implied_q")[1].get<double>() ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Uniform ratios echo the prior.
  DiscreteConfig uniform;
  uniform.lambdas = {{3.0, 3.0}};
  uniform.qs = {{0.5, 0.5}};
  uniform.out_prefix = "cli_out/disc_uniform";
  REQUIRE(run_discrete(uniform) == 0);
  const auto uniform_report = load_json("cli_out/disc_uniform_report.json");
  CHECK(uniform_report.at("virtual")[0].at("posterior")[1].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("run_discrete accepts a table file and validates it") {
  {
    std::ofstream out("cli_out/table.json");
    out << R"({"x_values": [0, 1], "y_values": [0, 1], "probs": [[0.4, 0.1], [0.1, 0.4]]})";
  }
  DiscreteConfig config;
  config.table_path = "cli_out/table.json";
  config.qs = {{1.0 / 3.0, 2.0 / 3.0}};
  config.out_prefix = "cli_out/disc_file";
  REQUIRE(run_discrete(config) == 0);
  const auto report = load_json("cli_out/disc_file_report.json");
  CHECK(report.at("jeffrey")[0].at("posterior")[1].get<double>() ==
        doctest::Approx(0.6).epsilon(1e-12));

  DiscreteConfig bad;
  bad.table_path = "cli_out/missing.json";
  bad.qs = {{0.5, 0.5}};
  CHECK_THROWS_AS(run_discrete(bad), DomainError);

  DiscreteConfig no_evidence;
  no_evidence.table_path = "cli_out/table.json";
  CHECK_THROWS_AS(run_discrete(no_evidence), DomainError);
}

TEST_CASE("run_check_consistency gaussian emits witness and verdicts") {
  CheckConsistencyConfig config;
  config.gaussian.panel = "left";
  resolve_panel(config.gaussian);
  config.m = 1000;
  config.k = 40;
  config.n_base = 40000;
  config.out_prefix = "cli_out/cc_left";
  REQUIRE(run_check_consistency(config) == 0);
  const auto doc = load_json("cli_out/cc_left.json");
  CHECK(doc.at("witness").at("sigma_zeta_sq").get<double>() ==
        doctest::Approx(0.09).epsilon(1e-9));
  CHECK(doc.at("report").at("scalar_checks")[0].at("verdict") == "pass");
  CHECK(doc.at("report").at("structure_check").at("applicable") == false);

  // Overdispersed evidence: no witness, failing sampled check, strict exit 4.
  config.gaussian.sigma_q = 2.0;
  config.out_prefix = "cli_out/cc_fail";
  REQUIRE(run_check_consistency(config) == 0);
  const auto fail_doc = load_json("cli_out/cc_fail.json");
  CHECK(fail_doc.contains("witness_error"));
  CHECK(fail_doc.at("report").at("scalar_checks")[0].at("verdict") == "fail");

  config.strict = true;
  config.out_prefix = "cli_out/cc_strict";
  CHECK(run_check_consistency(config) == 4);
}

TEST_CASE("run_ball_drop writes summaries, draws and the consistency sidecar") {
  BallDropConfig config;
  config.n = 20000;
  config.n_e = 64;
  config.seed = 11;
  config.out_prefix = "cli_out/bd";
  REQUIRE(run_ball_drop(config) == 0);

  const auto rows = csv_rows("cli_out/bd_summary.csv");
  REQUIRE(rows.size() == 3);
  const auto report = load_json("cli_out/bd_report.json");
  CHECK(report.at("predictive_time_at_prior_mean").get<double>() ==
        doctest::Approx(0.45152).epsilon(1e-4));
  for (const std::string method : {"jeffrey", "virtual", "distributional"}) {
    CHECK(report.at("methods").at(method).contains("z_of_g_9_81"));
    const std::string draws = slurp("cli_out/bd_draws_" + method + ".csv");
    CHECK(draws.find("draw,log_weight") != std::string::npos);
  }
  const auto sidecar = load_json("cli_out/bd_consistency.json");
  CHECK(sidecar.at("report").at("scalar_checks")[0].at("verdict") == "pass");

  // Narrative shape: wide posteriors for Jeffrey/virtual, a tight one for
  // distributional.
  const auto methods = report.at("methods");
  CHECK(methods.at("jeffrey").at("sd").get<double>() > 1.2);
  CHECK(methods.at("jeffrey").at("sd").get<double>() < 1.9);
  CHECK(methods.at("distributional").at("sd").get<double>() < 0.35);
  CHECK(methods.at("distributional").at("z_of_g_9_81").get<double>() > 3.0);
}

TEST_CASE("run_check_consistency covers the ball-drop defaults") {
  CheckConsistencyConfig config;
  config.experiment = "ball-drop";
  config.m = 1000;
  config.k = 40;
  config.n_base = 50000;
  config.out_prefix = "cli_out/cc_ball";
  REQUIRE(run_check_consistency(config) == 0);
  const auto doc = load_json("cli_out/cc_ball.json");
  const auto scalar = doc.at("report").at("scalar_checks")[0];
  CHECK(scalar.at("verdict") == "pass");
  // Both sides of the comparison are reported: total var[t] and the
  // evidence's expected conditional variance (0.03^2).
  CHECK(scalar.at("expected_cond_var").get<double>() ==
        doctest::Approx(9e-4).epsilon(0.06));
  CHECK(scalar.at("var_y").get<double>() > 1.5e-3);
}

TEST_CASE("discrete and consistency outputs are reproducible modulo timestamps") {
  DiscreteConfig discrete;
  discrete.out_prefix = "cli_out/rep_disc_a";
  REQUIRE(run_discrete(discrete) == 0);
  discrete.out_prefix = "cli_out/rep_disc_b";
  REQUIRE(run_discrete(discrete) == 0);
  CHECK(strip_timestamp(slurp("cli_out/rep_disc_a_report.json")) ==
        strip_timestamp(slurp("cli_out/rep_disc_b_report.json")));
  CHECK(strip_timestamp(slurp("cli_out/rep_disc_a_posteriors.csv")) ==
        strip_timestamp(slurp("cli_out/rep_disc_b_posteriors.csv")));

  CheckConsistencyConfig check;
  resolve_panel(check.gaussian);
  check.m = 200;
  check.k = 20;
  check.n_base = 5000;
  check.out_prefix = "cli_out/rep_cc_a";
  REQUIRE(run_check_consistency(check) == 0);
  check.out_prefix = "cli_out/rep_cc_b";
  REQUIRE(run_check_consistency(check) == 0);
  CHECK(strip_timestamp(slurp("cli_out/rep_cc_a.json")) ==
        strip_timestamp(slurp("cli_out/rep_cc_b.json")));
}

TEST_CASE("binary exit codes") {
  CHECK(run_binary("gaussian --panel left --out cli_out/bin_g >/dev/null 2>&1") == 0);
  CHECK(run_binary("gaussian --panel bogus --out cli_out/bin_x >/dev/null 2>&1") == 2);
  CHECK(run_binary("discrete --lambda 0,0 --out cli_out/bin_d >/dev/null 2>&1") == 3);
  CHECK(run_binary("check-consistency --panel left --sigma-q 2 --strict "
                   "--out cli_out/bin_cc >/dev/null 2>&1") == 4);
  CHECK(run_binary("no-such-command >/dev/null 2>&1") == 2);
  // Explicit flags override the preset.
  CHECK(run_binary("check-consistency --panel left --sigma-q 2 "
                   "--out cli_out/bin_cc2 >/dev/null 2>&1") == 0);
  const auto doc = load_json("cli_out/bin_cc2.json");
  CHECK(doc.at("config").at("gaussian").at("sigma_q").get<double>() == 2.0);
  CHECK(doc.contains("witness_error"));
}
