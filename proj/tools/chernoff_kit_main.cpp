#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "chernoff_kit/config.hpp"
#include "chernoff_kit/error.hpp"
#include "chernoff_kit/rates.hpp"
#include "chernoff_kit/report.hpp"
#include "chernoff_kit/runner.hpp"

namespace {

const std::map<std::string, std::string> kScenarioHelp = {
    {"heat", "periodic heat equation with a potential; Lie splitting and implicit Euler vs dense expm"},
    {"schrodinger", "periodic Schrodinger equation; unitary Lie splitting and implicit Euler"},
    {"dissipative", "random skew minus positive semidefinite matrix; implicit Euler and Lie splitting"},
    {"mult-example", "multiplication by z on a polar disc grid with radius seminorms; range gap check"},
};

int cmd_run(const std::string& config_path, std::size_t jobs, const std::string& out_dir) {
  ck::ExperimentConfig config = ck::load_config(config_path);
  ck::apply_seed_override(config);
  ck::RunOptions options;
  options.jobs = jobs;
  options.out_dir = out_dir;
  const ck::RunSummary summary = ck::run(config, options);
  for (const auto& r : summary.suites) {
    std::printf("%-12s %-8s %8.2fs\n", r.suite.c_str(), ck::to_string(r.verdict), r.seconds);
  }
  std::printf("overall      %s\n", ck::to_string(summary.overall));
  std::printf("csv  %s\njson %s\n", summary.csv_path.string().c_str(), summary.json_path.string().c_str());
  return summary.exit_code();
}

int cmd_scenarios() {
  for (const auto& name : ck::builtin_scenarios()) {
    std::printf("%-13s %s\n", name.c_str(), kScenarioHelp.at(name).c_str());
  }
  return 0;
}

int cmd_rates(const std::string& csv_path, double floor) {
  const auto rows = ck::read_convergence_csv(csv_path);
  // Uniform error over t per (seminorm, n), seminorms in first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, double>> uniform;
  for (const auto& r : rows) {
    if (!uniform.count(r.seminorm)) order.push_back(r.seminorm);
    double& e = uniform[r.seminorm][r.n];
    e = std::max(e, r.error);
  }
  std::printf("%-12s %10s %10s %10s %10s %6s %s\n", "seminorm", "slope", "residual", "ci_low", "ci_high", "points",
              "flag");
  for (const auto& name : order) {
    std::vector<double> errors;
    std::vector<std::size_t> ns;
    for (const auto& [n, e] : uniform[name]) {
      ns.push_back(n);
      errors.push_back(e);
    }
    const ck::RateFit fit = ck::fit_rate(errors, ns, floor);
    std::printf("%-12s %10.4f %10.4f %10.4f %10.4f %6zu %s\n", name.c_str(), fit.slope, fit.residual, fit.ci_low,
                fit.ci_high, fit.points, ck::to_string(fit.flag));
  }
  return 0;
}

int cmd_config(const std::string& config_path) {
  ck::ExperimentConfig config = ck::load_config(config_path);
  ck::apply_seed_override(config);
  std::cout << ck::render_json(ck::to_json(config));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chernoff product formula experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t jobs = 1;
  std::string out_dir = ".";
  auto* run = app.add_subcommand("run", "run the suites of an experiment config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--jobs", jobs, "suites evaluated concurrently")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "directory for the CSV and JSON artifacts");

  auto* scenarios = app.add_subcommand("scenarios", "list the built-in scenarios");

  std::string csv_path;
  double floor = ck::kRateFloor;
  auto* rates = app.add_subcommand("rates", "refit convergence rates from a convergence CSV");
  rates->add_option("--csv", csv_path, "CSV written by run")->required();
  rates->add_option("--floor", floor, "errors at or below this mark the floor flag");

  std::string echo_path;
  auto* config = app.add_subcommand("config", "print the normalized form of a config");
  config->add_option("--config", echo_path, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ck::kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, jobs, out_dir);
    if (*scenarios) return cmd_scenarios();
    if (*rates) return cmd_rates(csv_path, floor);
    if (*config) return cmd_config(echo_path);
  } catch (const ck::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return ck::kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
