#include "chernoff_kit/report.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "chernoff_kit/error.hpp"

namespace ck {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.seminorm;
    out += ',';
    out += format_double(r.t);
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += format_double(r.error);
    out += '\n';
  }
  return out;
}

std::vector<ConvergenceRow> read_convergence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(path.string() + ":1: expected header '" + kCsvHeader + "'");
  }
  std::vector<ConvergenceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != 4) throw Error(where + ": expected 4 fields, got " + std::to_string(fields.size()));
    ConvergenceRow row;
    row.seminorm = fields[0];
    try {
      std::size_t used = 0;
      row.t = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("t");
      const unsigned long long n = std::stoull(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("n");
      row.n = static_cast<std::size_t>(n);
      row.error = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("error");
    } catch (const std::exception&) {
      throw Error(where + ": malformed number");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "': " + std::strerror(errno));
    out << content;
    out.flush();
    if (!out) throw Error("cannot write '" + path.string() + "': write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot write '" + path.string() + "': " + ec.message());
  }
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

nlohmann::ordered_json json_numbers(const std::vector<double>& v) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

}  // namespace ck
