#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "chernoff_kit/config.hpp"
#include "chernoff_kit/report.hpp"
#include "chernoff_kit/scenarios.hpp"

namespace ck {

enum class Verdict { pass, fail, flagged };

const char* to_string(Verdict v);

struct SuiteResult {
  std::string suite;
  Verdict verdict = Verdict::fail;
  nlohmann::ordered_json details;
  /// converge only.
  std::vector<ConvergenceRow> rows;
  double seconds = 0.0;
};

struct RunSummary {
  ExperimentConfig config;
  /// One entry per requested suite, in canonical order.
  std::vector<SuiteResult> suites;
  Verdict overall = Verdict::pass;
  std::filesystem::path csv_path;
  std::filesystem::path json_path;

  /// 0 when every suite passes, 2 otherwise.
  int exit_code() const { return overall == Verdict::pass ? 0 : 2; }
};

struct RunOptions {
  /// Suites evaluated concurrently.
  std::size_t jobs = 1;
  std::filesystem::path out_dir = ".";
  bool write_outputs = true;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 2;
inline constexpr int kExitConfig = 3;

/// Builds the configured scenario (potential, sizes, seed stream "scenario").
Scenario build_scenario(const ExperimentConfig& config);

/// Seed of the named stream: config seed mixed with the FNV-1a hash of the name.
std::uint64_t stream_seed(std::uint64_t seed, const std::string& name);

/// Runs every requested suite and writes the CSV and JSON artifacts.
RunSummary run(const ExperimentConfig& config, const RunOptions& options = {});

/// The JSON summary document; contains no timings so reruns are byte-identical.
nlohmann::ordered_json summary_json(const RunSummary& summary);

}  // namespace ck
