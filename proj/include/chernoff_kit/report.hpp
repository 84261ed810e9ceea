#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ck {

struct ConvergenceRow {
  std::string seminorm;
  double t = 0.0;
  std::size_t n = 0;
  double error = 0.0;

  bool operator==(const ConvergenceRow&) const = default;
};

inline constexpr const char* kCsvHeader = "seminorm,t,n,error";
inline constexpr const char* kSchemaVersion = "1";

/// Shortest round-tripping decimal form ("%.17g"); non-finite values print as inf, -inf, nan.
std::string format_double(double v);

std::string render_csv(const std::vector<ConvergenceRow>& rows);
/// Parses a CSV produced by render_csv. Throws Error naming the path and line on malformed input.
std::vector<ConvergenceRow> read_convergence_csv(const std::filesystem::path& path);

/// Pretty JSON with stable key order and a trailing newline.
std::string render_json(const nlohmann::ordered_json& j);

/// Writes to a temporary sibling file and renames it into place. Errors name the path.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// JSON number for a double, with non-finite values as the strings "inf", "-inf", "nan".
nlohmann::ordered_json json_number(double v);
nlohmann::ordered_json json_numbers(const std::vector<double>& v);

}  // namespace ck
