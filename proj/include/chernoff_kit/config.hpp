#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ck {

struct PotentialConfig {
  /// zero | constant | one_plus_cos | barrier
  std::string kind = "one_plus_cos";
  /// Constant value or barrier height.
  double value = 1.0;
  /// Barrier half-width around pi.
  double width = 0.5;

  bool operator==(const PotentialConfig&) const = default;
};

struct ScenarioConfig {
  std::string name = "heat";
  /// heat, schrodinger
  std::int64_t n = 128;
  PotentialConfig potential;
  /// dissipative
  std::int64_t dim = 50;
  double skew_scale = 1.0;
  double damping_scale = 1.0;
  bool identity_damping = false;
  /// mult-example
  std::vector<double> radii{0.5, 1.0};
  std::int64_t radial = 64;
  std::int64_t angular = 128;
  std::array<double, 2> lambda{0.0, 0.0};
  double gap_radius = 1.0;
  std::int64_t candidates = 200;
  std::int64_t degree = 6;

  bool operator==(const ScenarioConfig&) const = default;
};

struct Tolerances {
  double rate_low = 0.8;
  double rate_high = 1.2;
  /// Errors at or below this count as exact reproduction.
  double exact = 1e-10;
  double unique = 1e-2;
  double eps_grid = 0.02;
  double equicontinuity_cap = 1e8;
  /// Allowed distance of the integral defect order from 2.
  double defect_order = 0.3;

  bool operator==(const Tolerances&) const = default;
};

struct TkConfig {
  /// random | matrix_file
  std::string perturbation = "random";
  std::string matrix_file;
  double width = 0.1;
  std::int64_t quadrature_n = 16;
  std::int64_t l_count = 8;

  bool operator==(const TkConfig&) const = default;
};

struct OutputConfig {
  std::string csv = "convergence.csv";
  std::string json = "summary.json";

  bool operator==(const OutputConfig&) const = default;
};

inline const std::vector<std::string> kSuiteNames = {"converge", "unique", "tk", "diagnostics", "exa-gap"};

struct ExperimentConfig {
  ScenarioConfig scenario;
  /// Requested suites in canonical order, no duplicates. "all" expands to the suites the scenario supports.
  std::vector<std::string> suites{"converge"};
  std::optional<double> t0;
  std::optional<std::vector<std::size_t>> n_grid;
  std::optional<std::vector<double>> t_grid;
  std::optional<std::vector<double>> s_grid;
  std::optional<std::vector<double>> eps_grid;
  std::int64_t n_big = 10000;
  Tolerances tolerances;
  TkConfig tk;
  OutputConfig outputs;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Default horizon of a built-in scenario.
double default_t0(const std::string& scenario);

/// Strict parse: unknown keys, wrong types and out-of-range values throw ConfigError naming the key.
ExperimentConfig parse_config(const nlohmann::json& j);
/// Reads and parses a JSON file; syntax errors carry line and column.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Normalized echo; parse_config(to_json(c)) == c.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

/// Applies CHERNOFF_KIT_SEED when set.
void apply_seed_override(ExperimentConfig& config);

}  // namespace ck
