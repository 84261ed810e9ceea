#include "chernoff_kit/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "chernoff_kit/error.hpp"
#include "chernoff_kit/scenarios.hpp"

namespace ck {

using nlohmann::json;

namespace {

const std::set<std::string> kPotentialKinds = {"zero", "constant", "one_plus_cos", "barrier"};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config key '" + path + "': " + what);
}

// Object reader that remembers which keys were consumed so leftovers can be rejected.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    allowed_.insert(key);
    return j_.contains(key);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& at(const std::string& key) {
    allowed_.insert(key);
    return j_.at(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    out = as_number(at(key), key_path(key));
  }

  void integer(const std::string& key, std::int64_t& out) {
    if (!has(key)) return;
    out = as_integer(at(key), key_path(key));
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_boolean()) fail(key_path(key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_string()) fail(key_path(key), "expected a string");
    out = v.get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) fail(key_path(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], key_path(key) + "[" + std::to_string(i) + "]"));
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!allowed_.count(key)) fail(key_path(key), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  static std::int64_t as_integer(const json& v, const std::string& path) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
    }
    fail(path, "expected an integer");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> allowed_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(path, what);
}

bool power_of_two(std::int64_t n) { return n >= 4 && (n & (n - 1)) == 0; }

void parse_scenario(const json& j, ScenarioConfig& sc) {
  if (j.is_string()) {
    sc.name = j.get<std::string>();
  } else {
    Obj o(j, "scenario");
    require(o.has("name"), "scenario.name", "missing");
    o.string("name", sc.name);
    if (sc.name == "heat" || sc.name == "schrodinger") {
      if (sc.name == "schrodinger") {
        sc.n = 64;
        sc.potential = {"barrier", 5.0, 0.5};
      }
      o.integer("N", sc.n);
      if (o.has("potential")) {
        Obj p(o.at("potential"), "scenario.potential");
        p.string("kind", sc.potential.kind);
        p.number("value", sc.potential.value);
        p.number("width", sc.potential.width);
        p.finish();
      }
    } else if (sc.name == "dissipative") {
      o.integer("dim", sc.dim);
      o.number("skew_scale", sc.skew_scale);
      o.number("damping_scale", sc.damping_scale);
      o.boolean("identity_damping", sc.identity_damping);
    } else if (sc.name == "mult-example") {
      o.numbers("radii", sc.radii);
      o.integer("radial", sc.radial);
      o.integer("angular", sc.angular);
      if (o.has("lambda")) {
        std::vector<double> lambda;
        o.numbers("lambda", lambda);
        require(lambda.size() == 2, "scenario.lambda", "expected [re, im]");
        sc.lambda = {lambda[0], lambda[1]};
      }
      o.number("gap_radius", sc.gap_radius);
      o.integer("candidates", sc.candidates);
      o.integer("degree", sc.degree);
    }
    o.finish();
  }
  if (j.is_string() && sc.name == "schrodinger") {
    sc.n = 64;
    sc.potential = {"barrier", 5.0, 0.5};
  }

  const auto names = builtin_scenarios();
  require(std::find(names.begin(), names.end(), sc.name) != names.end(), "scenario.name",
          "unknown scenario '" + sc.name + "'");
  require(power_of_two(sc.n), "scenario.N", "must be a power of two >= 4");
  require(kPotentialKinds.count(sc.potential.kind) > 0, "scenario.potential.kind",
          "expected zero, constant, one_plus_cos or barrier");
  require(sc.potential.width > 0.0, "scenario.potential.width", "must be > 0");
  require(sc.dim >= 2, "scenario.dim", "must be >= 2");
  require(sc.skew_scale >= 0.0, "scenario.skew_scale", "must be >= 0");
  require(sc.damping_scale >= 0.0, "scenario.damping_scale", "must be >= 0");
  require(!sc.radii.empty(), "scenario.radii", "must be nonempty");
  for (std::size_t i = 0; i < sc.radii.size(); ++i) {
    require(sc.radii[i] > 0.0 && (i == 0 || sc.radii[i] > sc.radii[i - 1]), "scenario.radii",
            "must be positive and strictly increasing");
  }
  require(sc.radial >= 1, "scenario.radial", "must be >= 1");
  require(sc.angular >= 3, "scenario.angular", "must be >= 3");
  require(sc.gap_radius > 0.0 && sc.gap_radius <= sc.radii.back(), "scenario.gap_radius",
          "must lie in (0, max radius]");
  require(std::hypot(sc.lambda[0], sc.lambda[1]) <= sc.gap_radius, "scenario.lambda", "must satisfy |lambda| <= gap_radius");
  require(sc.candidates >= 1, "scenario.candidates", "must be >= 1");
  require(sc.degree >= 0, "scenario.degree", "must be >= 0");
}

std::vector<std::string> parse_suites(const json& j, const std::string& scenario) {
  std::vector<std::string> requested;
  if (j.is_string()) {
    requested.push_back(j.get<std::string>());
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      require(j[i].is_string(), "suite[" + std::to_string(i) + "]", "expected a string");
      requested.push_back(j[i].get<std::string>());
    }
  } else {
    fail("suite", "expected a string or an array of strings");
  }
  require(!requested.empty(), "suite", "must name at least one suite");
  std::set<std::string> chosen;
  for (const auto& name : requested) {
    if (name == "all") {
      for (const auto& s : kSuiteNames) {
        if (s != "exa-gap" || scenario == "mult-example") chosen.insert(s);
      }
      continue;
    }
    require(std::find(kSuiteNames.begin(), kSuiteNames.end(), name) != kSuiteNames.end(), "suite",
            "unknown suite '" + name + "'");
    require(!chosen.count(name), "suite", "suite '" + name + "' requested twice");
    chosen.insert(name);
  }
  if (chosen.count("exa-gap") && scenario != "mult-example") {
    fail("suite", "exa-gap is only defined for the mult-example scenario");
  }
  std::vector<std::string> out;
  for (const auto& s : kSuiteNames) {
    if (chosen.count(s)) out.push_back(s);
  }
  return out;
}

}  // namespace

double default_t0(const std::string& scenario) { return scenario == "schrodinger" ? 0.5 : 1.0; }

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Obj o(j, "");
  require(o.has("scenario"), "scenario", "missing");
  parse_scenario(o.at("scenario"), c.scenario);
  if (o.has("suite")) c.suites = parse_suites(o.at("suite"), c.scenario.name);

  if (o.has("t0")) {
    c.t0 = Obj::as_number(o.at("t0"), "t0");
    require(*c.t0 > 0.0, "t0", "must be > 0");
  }
  const double t0 = c.t0.value_or(default_t0(c.scenario.name));

  if (o.has("n_grid")) {
    const json& v = o.at("n_grid");
    require(v.is_array() && !v.empty(), "n_grid", "expected a nonempty array of integers");
    std::vector<std::size_t> grid;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string path = "n_grid[" + std::to_string(i) + "]";
      const std::int64_t n = Obj::as_integer(v[i], path);
      require(n >= 1, path, "must be >= 1");
      require(grid.empty() || static_cast<std::size_t>(n) > grid.back(), path, "n_grid must be strictly increasing");
      grid.push_back(static_cast<std::size_t>(n));
    }
    c.n_grid = std::move(grid);
  }
  if (o.has("t_grid")) {
    std::vector<double> grid;
    o.numbers("t_grid", grid);
    require(!grid.empty(), "t_grid", "must be nonempty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::ostringstream bound;
      bound << "must lie in [0, t0 = " << t0 << "]";
      require(grid[i] >= 0.0 && grid[i] <= t0, "t_grid[" + std::to_string(i) + "]", bound.str());
    }
    c.t_grid = std::move(grid);
  }
  if (o.has("s_grid")) {
    std::vector<double> grid;
    o.numbers("s_grid", grid);
    require(!grid.empty(), "s_grid", "must be nonempty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      require(grid[i] > 0.0 && (i == 0 || grid[i] < grid[i - 1]), "s_grid[" + std::to_string(i) + "]",
              "s_grid must be positive and strictly decreasing");
    }
    c.s_grid = std::move(grid);
  }
  if (o.has("eps_grid")) {
    std::vector<double> grid;
    o.numbers("eps_grid", grid);
    require(grid.size() >= 3, "eps_grid", "needs at least three values");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      require(grid[i] > 0.0 && (i == 0 || grid[i] < grid[i - 1]), "eps_grid[" + std::to_string(i) + "]",
              "eps_grid must be positive and strictly decreasing");
    }
    c.eps_grid = std::move(grid);
  }
  o.integer("n_big", c.n_big);
  require(c.n_big >= 1, "n_big", "must be >= 1");

  if (o.has("tolerances")) {
    Obj t(o.at("tolerances"), "tolerances");
    auto& tol = c.tolerances;
    t.number("rate_low", tol.rate_low);
    t.number("rate_high", tol.rate_high);
    t.number("exact", tol.exact);
    t.number("unique", tol.unique);
    t.number("eps_grid", tol.eps_grid);
    t.number("equicontinuity_cap", tol.equicontinuity_cap);
    t.number("defect_order", tol.defect_order);
    t.finish();
    for (const auto& [key, value] :
         {std::pair{"rate_low", tol.rate_low}, {"rate_high", tol.rate_high}, {"exact", tol.exact},
          {"unique", tol.unique}, {"eps_grid", tol.eps_grid}, {"equicontinuity_cap", tol.equicontinuity_cap},
          {"defect_order", tol.defect_order}}) {
      require(value > 0.0, std::string("tolerances.") + key, "must be > 0");
    }
    require(tol.rate_low < tol.rate_high, "tolerances.rate_high", "must exceed rate_low");
  }

  if (o.has("tk")) {
    Obj t(o.at("tk"), "tk");
    t.string("perturbation", c.tk.perturbation);
    t.string("matrix_file", c.tk.matrix_file);
    t.number("width", c.tk.width);
    t.integer("quadrature_n", c.tk.quadrature_n);
    t.integer("l_count", c.tk.l_count);
    t.finish();
    require(c.tk.perturbation == "random" || c.tk.perturbation == "matrix_file", "tk.perturbation",
            "expected random or matrix_file");
    require(c.tk.perturbation != "matrix_file" || !c.tk.matrix_file.empty(), "tk.matrix_file",
            "required when perturbation is matrix_file");
    require(c.tk.width > 0.0, "tk.width", "must be > 0");
    require(c.tk.quadrature_n >= 2, "tk.quadrature_n", "must be >= 2");
    require(c.tk.l_count >= 1, "tk.l_count", "must be >= 1");
  }

  if (o.has("outputs")) {
    Obj out(o.at("outputs"), "outputs");
    out.string("csv", c.outputs.csv);
    out.string("json", c.outputs.json);
    out.finish();
    require(!c.outputs.csv.empty(), "outputs.csv", "must be nonempty");
    require(!c.outputs.json.empty(), "outputs.json", "must be nonempty");
  }

  if (o.has("seed")) {
    const json& v = o.at("seed");
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0), "seed",
            "expected a nonnegative integer");
    c.seed = v.get<std::uint64_t>();
  }
  o.finish();
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  const auto& sc = c.scenario;
  nlohmann::ordered_json scenario{{"name", sc.name}};
  if (sc.name == "heat" || sc.name == "schrodinger") {
    scenario["N"] = sc.n;
    scenario["potential"] = {
        {"kind", sc.potential.kind}, {"value", sc.potential.value}, {"width", sc.potential.width}};
  } else if (sc.name == "dissipative") {
    scenario["dim"] = sc.dim;
    scenario["skew_scale"] = sc.skew_scale;
    scenario["damping_scale"] = sc.damping_scale;
    scenario["identity_damping"] = sc.identity_damping;
  } else if (sc.name == "mult-example") {
    scenario["radii"] = sc.radii;
    scenario["radial"] = sc.radial;
    scenario["angular"] = sc.angular;
    scenario["lambda"] = sc.lambda;
    scenario["gap_radius"] = sc.gap_radius;
    scenario["candidates"] = sc.candidates;
    scenario["degree"] = sc.degree;
  }
  j["scenario"] = scenario;
  j["suite"] = c.suites;
  if (c.t0) j["t0"] = *c.t0;
  if (c.n_grid) j["n_grid"] = *c.n_grid;
  if (c.t_grid) j["t_grid"] = *c.t_grid;
  if (c.s_grid) j["s_grid"] = *c.s_grid;
  if (c.eps_grid) j["eps_grid"] = *c.eps_grid;
  j["n_big"] = c.n_big;
  const auto& tol = c.tolerances;
  j["tolerances"] = {{"rate_low", tol.rate_low},
                     {"rate_high", tol.rate_high},
                     {"exact", tol.exact},
                     {"unique", tol.unique},
                     {"eps_grid", tol.eps_grid},
                     {"equicontinuity_cap", tol.equicontinuity_cap},
                     {"defect_order", tol.defect_order}};
  nlohmann::ordered_json tk{{"perturbation", c.tk.perturbation}};
  if (!c.tk.matrix_file.empty()) tk["matrix_file"] = c.tk.matrix_file;
  tk["width"] = c.tk.width;
  tk["quadrature_n"] = c.tk.quadrature_n;
  tk["l_count"] = c.tk.l_count;
  j["tk"] = tk;
  j["outputs"] = {{"csv", c.outputs.csv}, {"json", c.outputs.json}};
  j["seed"] = c.seed;
  return j;
}

void apply_seed_override(ExperimentConfig& config) {
  const char* env = std::getenv("CHERNOFF_KIT_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || env[0] == '-') throw ConfigError("CHERNOFF_KIT_SEED must be a nonnegative integer");
  config.seed = v;
}

}  // namespace ck
