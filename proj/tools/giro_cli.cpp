// Command-line harness: seeded bandit simulations, the naive-bootstrap
// failure-mode experiment, contextual runs on classification CSVs, and the
// machine-checked bound verification grids.
//
// Exit codes: 0 success, 1 usage or data errors, 2 any bound-check failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "giro/analysis.hpp"
#include "giro/contextual.hpp"
#include "giro/harness.hpp"

namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

int run_simulate(const std::string& config_path, const std::string& out_path,
                 bool independent_draws) {
  giro::ExperimentConfig cfg = giro::parse_config_file(config_path);
  if (cfg.mode != "mab") {
    std::cerr << "simulate: config mode must be 'mab', got '" << cfg.mode
              << "'\n";
    return 1;
  }
  const giro::MabExperimentResult result =
      giro::run_experiment(cfg, independent_draws);
  const giro::AggregateCurve curve = giro::aggregate_regret(result);
  const std::string path = out_path.empty() ? cfg.out : out_path;
  if (path.empty()) {
    giro::emit_csv(curve, std::cout);
  } else {
    write_text(path, giro::csv_string(curve));
    std::cerr << "wrote " << path << " (" << curve.run_count << " runs, n="
              << curve.horizon << ")\n";
  }
  return 0;
}

int run_lemma1(double mu1, double mu2, std::int64_t n, std::int64_t runs,
               std::uint64_t seed) {
  const giro::Lemma1Result r = giro::lemma1_experiment(mu1, mu2, n, runs, seed);
  const double floor =
      giro::naive_bootstrap_regret_floor(mu1, mu1 - mu2, n);
  std::cout << "lock_frequency," << fmt9(r.lock_frequency) << "\n"
            << "expected_lock_frequency," << fmt9(0.5 * (1.0 - mu1)) << "\n"
            << "mean_regret," << fmt9(r.mean_regret) << "\n"
            << "regret_stderr," << fmt9(r.regret_std_error) << "\n"
            << "regret_floor," << fmt9(floor) << "\n"
            << "lock_violations," << r.lock_violations << "\n";
  return r.lock_violations == 0 ? 0 : 2;
}

int run_contextual(const std::string& config_path, const std::string& data_path,
                   const std::string& out_path) {
  giro::ExperimentConfig cfg = giro::parse_config_file(config_path);
  if (cfg.mode != "contextual") {
    std::cerr << "contextual: config mode must be 'contextual', got '"
              << cfg.mode << "'\n";
    return 1;
  }
  const giro::ClassificationBanditEnv env =
      giro::load_classification_env(data_path, cfg.seed);
  const giro::ContextualExperimentResult result =
      giro::run_contextual_experiment(
          cfg, env, [](const giro::ContextualEnv& proto) {
            return std::make_unique<giro::ClassificationBanditEnv>(
                static_cast<const giro::ClassificationBanditEnv&>(proto));
          });
  const giro::AggregateCurve curve = giro::aggregate_reward_rate(result);
  const std::string path = out_path.empty() ? cfg.out : out_path;
  if (path.empty()) {
    giro::emit_csv(curve, std::cout);
  } else {
    write_text(path, giro::csv_string(curve));
    std::cerr << "wrote " << path << "\n";
  }
  return 0;
}

int run_verify_bounds(const std::string& grid, const std::string& out_path) {
  const bool full = grid == "full";
  const std::vector<double> ps = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const std::vector<std::int64_t> as = {1, 2, 3};

  std::vector<giro::BoundReport> reports;
  {
    auto w = giro::verify_inverse_optimism_grid(full ? 40 : 12, ps, as);
    reports.insert(reports.end(), w.begin(), w.end());
  }
  {
    auto l5 = giro::verify_pmf_lower_bound_grid(full ? 60 : 20, ps);
    reports.insert(reports.end(), l5.begin(), l5.end());
  }
  {
    auto l4 = giro::verify_bootstrap_tail_grid(full ? 40 : 12, ps, as);
    reports.insert(reports.end(), l4.begin(), l4.end());
  }

  std::string csv = "check,n,p,a,lhs,rhs,slack,pass\n";
  std::int64_t failures = 0;
  for (const giro::BoundReport& r : reports) {
    if (!r.pass) ++failures;
    csv += r.check;
    csv += ',' + std::to_string(r.n) + ',' + fmt9(r.p) + ',' + fmt9(r.a) +
           ',' + fmt9(r.lhs) + ',' + fmt9(r.rhs) + ',' + fmt9(r.slack) + ',' +
           (r.pass ? "1" : "0") + '\n';
  }
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    write_text(out_path, csv);
  }
  std::cerr << reports.size() << " checks, " << failures << " failures\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bootstrap-exploration bandit harness"};
  app.require_subcommand(1);

  std::string config_path, out_path, data_path, grid = "full";
  bool independent_draws = false;
  double mu1 = 0.6, mu2 = 0.2;
  std::int64_t n = 2000, runs = 4000;
  std::uint64_t seed = 1;

  CLI::App* simulate =
      app.add_subcommand("simulate", "multi-armed bandit regret simulation");
  simulate->add_option("--config", config_path, "experiment config file")
      ->required();
  simulate->add_option("--out", out_path, "output CSV path");
  simulate->add_flag("--independent-draws", independent_draws,
                     "draw rewards independently per policy instead of "
                     "sharing realizations");

  CLI::App* lemma1 = app.add_subcommand(
      "lemma1", "naive-bootstrap lock-event reproduction");
  lemma1->add_option("--mu1", mu1, "mean of the optimal arm")->required();
  lemma1->add_option("--mu2", mu2, "mean of the suboptimal arm")->required();
  lemma1->add_option("--n", n, "horizon")->required();
  lemma1->add_option("--runs", runs, "number of runs")->required();
  lemma1->add_option("--seed", seed, "master seed")->required();

  CLI::App* contextual =
      app.add_subcommand("contextual", "contextual bandit run on a CSV dataset");
  contextual->add_option("--config", config_path, "experiment config file")
      ->required();
  contextual->add_option("--data", data_path, "dataset CSV")->required();
  contextual->add_option("--out", out_path, "output CSV path");

  CLI::App* verify =
      app.add_subcommand("verify-bounds", "machine-check the closed-form bounds");
  verify->add_option("--grid", grid, "small|full")
      ->check(CLI::IsMember({"small", "full"}));
  verify->add_option("--out", out_path, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed())
      return run_simulate(config_path, out_path, independent_draws);
    if (lemma1->parsed()) return run_lemma1(mu1, mu2, n, runs, seed);
    if (contextual->parsed())
      return run_contextual(config_path, data_path, out_path);
    if (verify->parsed()) return run_verify_bounds(grid, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
