#include "chernoff_kit/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>

#include "chernoff_kit/convergence.hpp"
#include "chernoff_kit/diagnostics.hpp"
#include "chernoff_kit/error.hpp"
#include "chernoff_kit/trotter_kato.hpp"

namespace ck {

using ojson = nlohmann::ordered_json;

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::flagged: return "flagged";
  }
  return "fail";
}

std::uint64_t stream_seed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // splitmix64 finalizer over the combination.
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

Eigen::VectorXd make_potential(const PotentialConfig& p, Index n) {
  const Vector x = periodic_grid(n);
  Eigen::VectorXd v(n);
  for (Index j = 0; j < n; ++j) {
    const double xj = x(j).real();
    if (p.kind == "zero") {
      v(j) = 0.0;
    } else if (p.kind == "constant") {
      v(j) = p.value;
    } else if (p.kind == "one_plus_cos") {
      v(j) = p.value * (1.0 + std::cos(xj));
    } else {
      v(j) = std::abs(xj - std::numbers::pi) < p.width ? p.value : 0.0;
    }
  }
  return v;
}

std::vector<double> uniform_grid(double t0, std::size_t points) {
  std::vector<double> out;
  for (std::size_t i = 0; i < points; ++i) out.push_back(t0 * static_cast<double>(i) / static_cast<double>(points - 1));
  out.back() = t0;
  return out;
}

const std::vector<double> kDefaultEpsGrid = {0.1, 0.05, 0.02, 0.01, 0.005, 0.002};

std::vector<double> probe_s_grid() {
  std::vector<double> out;
  for (int k = 1; k <= 8; ++k) out.push_back(std::pow(10.0, -k));
  return out;
}

ojson rate_json(const RateFit& fit) {
  return {{"slope", json_number(fit.slope)},   {"residual", json_number(fit.residual)},
          {"ci_low", json_number(fit.ci_low)}, {"ci_high", json_number(fit.ci_high)},
          {"points", fit.points},              {"flag", to_string(fit.flag)}};
}

ojson stability_json(const StabilityFit& fit) {
  return {{"M", json_number(fit.M)}, {"a", json_number(fit.a)}, {"used_adjoint", fit.used_adjoint},
          {"samples", fit.samples.size()}};
}

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
  if (a == Verdict::flagged || b == Verdict::flagged) return Verdict::flagged;
  return Verdict::pass;
}

struct Context {
  const ExperimentConfig& config;
  const Scenario& scenario;
};

void suite_converge(const Context& ctx, SuiteResult& out) {
  const auto& sc = ctx.scenario;
  const auto& tol = ctx.config.tolerances;
  ConvergeOptions options;
  options.stability_lattice = LatticeSpec::geometric(sc.t0, sc.t0 / 64.0, 4);
  options.stability_trials = 1;
  options.stability_seed = stream_seed(ctx.config.seed, "converge");
  const auto report = chernoff_converge(sc.primary(), sc.reference, sc.initial, sc.t0, sc.n_grid, sc.t_grid,
                                        sc.seminorms, options);

  const double max_error = report.max_error();
  const bool exact = max_error <= tol.exact;
  Verdict verdict = Verdict::pass;
  ojson per_seminorm = ojson::array();
  for (std::size_t a = 0; a < report.seminorms.size(); ++a) {
    const auto curve = report.uniform_curve(a);
    const RateFit& fit = report.fitted_rate[a];
    const bool decreasing = decreasing_tail(curve, kRateTailPoints, 0.0);
    Verdict v = Verdict::pass;
    if (!exact) {
      if (!fit.usable()) {
        v = Verdict::flagged;
      } else if (fit.slope < tol.rate_low || fit.slope > tol.rate_high || !decreasing) {
        v = Verdict::fail;
      }
    }
    verdict = combine(verdict, v);
    per_seminorm.push_back({{"seminorm", report.seminorms[a]},
                            {"uniform_errors", json_numbers(curve)},
                            {"decreasing_tail", decreasing},
                            {"rate", rate_json(fit)},
                            {"verdict", to_string(v)}});
  }
  out.verdict = verdict;
  ojson n_grid = ojson::array();
  for (std::size_t n : report.n_grid) n_grid.push_back(n);
  out.details = {{"chernoff", sc.primary().label()},
                 {"t0", sc.t0},
                 {"n_grid", n_grid},
                 {"t_grid", json_numbers(report.t_grid)},
                 {"self_referenced", report.self_referenced},
                 {"max_error", json_number(max_error)},
                 {"exact", exact},
                 {"seminorms", per_seminorm}};
  if (report.stability_estimate) out.details["stability"] = stability_json(*report.stability_estimate);

  const std::size_t first_n = report.self_referenced ? 1 : 0;
  for (std::size_t a = 0; a < report.seminorms.size(); ++a) {
    for (std::size_t ti = 0; ti < report.t_grid.size(); ++ti) {
      for (std::size_t ni = first_n; ni < report.n_grid.size(); ++ni) {
        out.rows.push_back({report.seminorms[a], report.t_grid[ti], report.n_grid[ni], report.error(a, ti, ni)});
      }
    }
  }
}

void suite_unique(const Context& ctx, SuiteResult& out) {
  const auto& sc = ctx.scenario;
  std::vector<ChernoffFn> functions = sc.chernoff;
  functions.push_back(semigroup_chernoff(sc.reference));
  const auto n_big = static_cast<std::size_t>(ctx.config.n_big);
  const auto report = uniqueness_cross_check(functions, sc.initial, sc.t0, n_big, sc.t_grid, sc.seminorms);
  ojson pairs = ojson::array();
  std::size_t k = 0;
  for (std::size_t i = 0; i < report.labels.size(); ++i) {
    for (std::size_t j = i + 1; j < report.labels.size(); ++j) {
      pairs.push_back({{"a", report.labels[i]}, {"b", report.labels[j]},
                       {"deviation", json_number(report.pair_deviation[k++])}});
    }
  }
  out.verdict = report.max_deviation <= ctx.config.tolerances.unique ? Verdict::pass : Verdict::fail;
  out.details = {{"n_big", n_big},
                 {"tolerance", ctx.config.tolerances.unique},
                 {"max_deviation", json_number(report.max_deviation)},
                 {"pairs", pairs}};
}

LinOp tk_perturbation(const Context& ctx) {
  const auto& tk = ctx.config.tk;
  const LinOp& z = ctx.scenario.generator;
  if (tk.perturbation == "matrix_file") {
    LinOp w = load_dense_operator(tk.matrix_file);
    require_dim("tk perturbation " + tk.matrix_file, z.dim(), w.dim());
    return w;
  }
  std::mt19937_64 rng(stream_seed(ctx.config.seed, "tk"));
  const Index n = z.dim();
  if (z.kind() == OpKind::diagonal) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vector d(n);
    for (Index i = 0; i < n; ++i) d(i) = unit(rng);
    return LinOp::diagonal(d);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = Scalar(normal(rng), normal(rng));
  }
  Matrix h = (g + g.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  return LinOp::dense(h / eig.eigenvalues().cwiseAbs().maxCoeff());
}

void suite_tk(const Context& ctx, SuiteResult& out) {
  const auto& sc = ctx.scenario;
  const auto& cfg = ctx.config;
  const auto& tol = cfg.tolerances;
  const auto family =
      GeneratorFamily::linear(sc.generator, tk_perturbation(ctx), cfg.s_grid.value_or(GeneratorFamily::default_s_grid()));

  const auto equi = family_equicontinuity(family, sc.t0, static_cast<std::size_t>(cfg.tk.l_count),
                                          tol.equicontinuity_cap);
  const auto qn = static_cast<std::size_t>(cfg.tk.quadrature_n);
  // A basis smaller than the space is not closed under the integral operator; use preimages then.
  const WitnessSource source = static_cast<Index>(sc.density_basis.size()) < sc.dim() ? WitnessSource::preimage
                                                                                      : WitnessSource::basis;
  const auto witnesses = integral_witnesses(family, sc.density_basis, cfg.tk.width, qn, source);
  const auto core = core_condition_check(family, witnesses, sc.density_basis, sc.seminorms);
  const auto sweep = semigroup_convergence_sweep(family, sc.initial, sc.t0, sc.t_grid, sc.seminorms);

  // Consecutive s values halve on the default grid; the sup error should halve with them.
  bool ratio_ok = true;
  ojson sweep_json = ojson::array();
  for (std::size_t a = 0; a < sweep.seminorms.size(); ++a) {
    const auto& e = sweep.sup_error[a];
    double ratio = NAN;
    if (e.size() >= 2) {
      const double s_ratio = sweep.s_grid[e.size() - 2] / sweep.s_grid[e.size() - 1];
      ratio = e[e.size() - 2] / e[e.size() - 1];
      const bool floor = e.back() <= 1e-13;
      ratio_ok = ratio_ok && (floor || (ratio >= 0.8 * s_ratio && ratio <= 1.2 * s_ratio));
    }
    sweep_json.push_back({{"seminorm", sweep.seminorms[a]}, {"sup_error", json_numbers(e)},
                          {"tail_ratio", json_number(ratio)}});
  }

  // Defects under repeated quadrature doubling; the order comes from the last pair.
  std::vector<double> defects;
  for (std::size_t k = 0; k < 4; ++k) {
    defects.push_back(core_elements_from_integrals(sc.reference, sc.initial, 0.0, cfg.tk.width, qn << k).defect);
  }
  const double order = std::log2(defects[2] / defects[3]);
  const double defect_floor = 1e-12 * (1.0 + sc.generator.apply(sc.initial.coords()).norm());
  const bool defect_ok = defects[3] <= defect_floor || std::abs(order - 2.0) <= tol.defect_order;

  std::size_t converging = 0;
  for (bool b : core.witness_converges) converging += b;
  const bool pass = equi.pass && core.pass && sweep.pass && ratio_ok && defect_ok;
  out.verdict = pass ? Verdict::pass : Verdict::fail;
  out.details = {
      {"perturbation", cfg.tk.perturbation},
      {"s_grid", json_numbers(family.s_grid)},
      {"equicontinuity",
       {{"M", json_number(equi.fit.M)}, {"a", json_number(equi.fit.a)}, {"bound", json_number(equi.bound)},
        {"pass", equi.pass}}},
      {"core",
       {{"witness_source", source == WitnessSource::basis ? "basis" : "preimage"},
        {"witnesses", core.witness_converges.size()},
        {"converging", converging},
        {"witness_rank", core.witness_rank},
        {"combined_rank", core.combined_rank},
        {"pass", core.pass}}},
      {"sweep", {{"seminorms", sweep_json}, {"pass", sweep.pass}, {"ratio_ok", ratio_ok}}},
      {"integral_defect",
       {{"width", cfg.tk.width},
        {"quadrature_n", qn},
        {"defects", json_numbers(defects)},
        {"order", json_number(order)},
        {"pass", defect_ok}}}};
}

ojson curve_json(const ConsistencyCurve& c) {
  ojson dev = ojson::object();
  for (std::size_t a = 0; a < c.seminorms.size(); ++a) dev[c.seminorms[a]] = json_numbers(c.max_deviation[a]);
  return {{"eps_grid", json_numbers(c.eps_grid)}, {"max_deviation", dev}, {"samples", c.samples}, {"pass", c.pass}};
}

void suite_diagnostics(const Context& ctx, SuiteResult& out) {
  const auto& sc = ctx.scenario;
  const auto eps = ctx.config.eps_grid.value_or(kDefaultEpsGrid);
  const StateVector zh = apply(sc.generator, sc.initial);
  const auto s_grid = probe_s_grid();
  bool pass = true;
  ojson functions = ojson::array();
  for (const auto& f : sc.chernoff) {
    const auto small = small_step_consistency(f, sc.initial, eps, sc.seminorms);
    const auto diff = step_difference_consistency(f, sc.initial, sc.t0, eps, sc.seminorms);
    const auto probe = effective_derivative_probe(f, ApproximatingFamily::constant(sc.initial, zh), s_grid, sc.seminorms);
    ojson probe_err = ojson::object();
    for (std::size_t a = 0; a < probe.seminorms.size(); ++a) {
      probe_err[probe.seminorms[a]] = json_numbers(probe.quotient_error[a]);
    }
    const bool ok = small.pass && diff.pass && probe.pass;
    pass = pass && ok;
    functions.push_back({{"chernoff", f.label()},
                         {"small_step", curve_json(small)},
                         {"step_difference", curve_json(diff)},
                         {"derivative_probe",
                          {{"s_grid", json_numbers(probe.s_grid)}, {"quotient_error", probe_err},
                           {"pass", probe.pass}}},
                         {"pass", ok}});
  }
  const std::size_t n = sc.n_grid.back();
  const auto reg = regularity_check(sc.primary(), sc.generator, sc.initial, sc.t0, n, sc.t_grid, sc.seminorms);
  out.verdict = pass ? Verdict::pass : Verdict::fail;
  out.details = {{"functions", functions},
                 {"regularity",
                  {{"n", n},
                   {"delta", reg.delta},
                   {"modulus", json_numbers(reg.modulus)},
                   {"refined_modulus", json_numbers(reg.refined_modulus)},
                   {"shrinks", reg.pass},
                   {"informational", true}}}};
}

void suite_exa_gap(const Context& ctx, SuiteResult& out) {
  const auto& sc = ctx.scenario;
  const auto& cfg = ctx.config;
  const Scalar lambda(cfg.scenario.lambda[0], cfg.scenario.lambda[1]);
  const auto candidates =
      random_polynomial_candidates(sc, static_cast<std::size_t>(cfg.scenario.candidates),
                                   static_cast<std::size_t>(cfg.scenario.degree), stream_seed(cfg.seed, "exa-gap"));
  const StateVector one(sc.space, Vector::Ones(sc.dim()));
  const auto gap = resolvent_range_gap(sc, lambda, one, candidates, cfg.scenario.gap_radius);
  const bool gap_ok = gap.pass && gap.eps_grid < cfg.tolerances.eps_grid;

  // ||T(t) g||_r <= e^{t r} ||g||_r on samples, with equality for g = 1.
  std::vector<StateVector> samples{one};
  for (std::size_t i = 0; i < std::min<std::size_t>(candidates.size(), 10); ++i) samples.push_back(candidates[i]);
  double worst_excess = 0.0;
  double worst_equality = 0.0;
  for (std::size_t a = 0; a < sc.radii.size(); ++a) {
    const double r = sc.radii[a];
    for (double t : sc.t_grid) {
      const LinOp tt = sc.reference.at(t);
      const double bound = std::exp(t * r);
      for (std::size_t k = 0; k < samples.size(); ++k) {
        const double lhs = sc.seminorms.evaluate(a, tt.apply(samples[k].coords()));
        const double rhs = bound * sc.seminorms.evaluate(a, samples[k].coords());
        worst_excess = std::max(worst_excess, (lhs - rhs) / rhs);
        if (k == 0) worst_equality = std::max(worst_equality, std::abs(lhs - rhs) / rhs);
      }
    }
  }
  const bool bound_ok = worst_excess <= 1e-12 && worst_equality <= 1e-10;
  out.verdict = gap_ok && bound_ok ? Verdict::pass : Verdict::fail;
  out.details = {{"lambda", {lambda.real(), lambda.imag()}},
                 {"radius", cfg.scenario.gap_radius},
                 {"candidates", gap.candidates},
                 {"min_defect", json_number(gap.min_defect)},
                 {"lower_bound", json_number(gap.lower_bound)},
                 {"eps_grid", json_number(gap.eps_grid)},
                 {"nearest_node", {gap.nearest_node.real(), gap.nearest_node.imag()}},
                 {"node_distance", gap.node_distance},
                 {"gap_pass", gap_ok},
                 {"semigroup_bound",
                  {{"worst_relative_excess", json_number(worst_excess)},
                   {"worst_equality_gap", json_number(worst_equality)},
                   {"pass", bound_ok}}}};
}

void run_suite(const Context& ctx, SuiteResult& out) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if (out.suite == "converge") {
      suite_converge(ctx, out);
    } else if (out.suite == "unique") {
      suite_unique(ctx, out);
    } else if (out.suite == "tk") {
      suite_tk(ctx, out);
    } else if (out.suite == "diagnostics") {
      suite_diagnostics(ctx, out);
    } else if (out.suite == "exa-gap") {
      suite_exa_gap(ctx, out);
    } else {
      throw ConfigError("unknown suite '" + out.suite + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    out.verdict = Verdict::fail;
    out.details = {{"error", e.what()}};
    out.rows.clear();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Scenario build_scenario(const ExperimentConfig& config) {
  const auto& sc = config.scenario;
  Scenario s = [&] {
    if (sc.name == "heat") return build_heat_potential(sc.n, make_potential(sc.potential, sc.n));
    if (sc.name == "schrodinger") return build_schrodinger(sc.n, make_potential(sc.potential, sc.n));
    if (sc.name == "dissipative") {
      return build_dissipative_random(sc.dim, stream_seed(config.seed, "scenario"),
                                      {sc.skew_scale, sc.damping_scale, sc.identity_damping});
    }
    if (sc.name == "mult-example") {
      return build_multiplication_example(sc.radii, static_cast<std::size_t>(sc.radial),
                                          static_cast<std::size_t>(sc.angular));
    }
    throw ConfigError("unknown scenario '" + sc.name + "'");
  }();
  if (config.t0) {
    s.t0 = *config.t0;
    if (!config.t_grid) s.t_grid = uniform_grid(s.t0, s.t_grid.size());
  }
  if (config.t_grid) s.t_grid = *config.t_grid;
  if (config.n_grid) s.n_grid = *config.n_grid;
  return s;
}

RunSummary run(const ExperimentConfig& config, const RunOptions& options) {
  RunSummary summary;
  summary.config = config;
  const Scenario scenario = build_scenario(config);
  scenario.validate(stream_seed(config.seed, "validate"));
  const Context ctx{config, scenario};

  for (const auto& name : config.suites) {
    SuiteResult r;
    r.suite = name;
    summary.suites.push_back(std::move(r));
  }
  const std::size_t workers = std::clamp<std::size_t>(options.jobs, 1, summary.suites.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < summary.suites.size(); i = next++) {
      try {
        run_suite(ctx, summary.suites[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  summary.overall = Verdict::pass;
  for (const auto& r : summary.suites) summary.overall = combine(summary.overall, r.verdict);

  summary.csv_path = options.out_dir / config.outputs.csv;
  summary.json_path = options.out_dir / config.outputs.json;
  if (options.write_outputs) {
    std::vector<ConvergenceRow> rows;
    for (const auto& r : summary.suites) rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    std::filesystem::create_directories(options.out_dir);
    write_atomic(summary.csv_path, render_csv(rows));
    write_atomic(summary.json_path, render_json(summary_json(summary)));
  }
  return summary;
}

ojson summary_json(const RunSummary& summary) {
  ojson suites = ojson::array();
  for (const auto& r : summary.suites) {
    suites.push_back({{"name", r.suite}, {"verdict", to_string(r.verdict)}, {"details", r.details}});
  }
  return {{"schema_version", kSchemaVersion},
          {"scenario", summary.config.scenario.name},
          {"seed", summary.config.seed},
          {"verdict", to_string(summary.overall)},
          {"suites", suites},
          {"artifacts", {{"csv", summary.config.outputs.csv}, {"json", summary.config.outputs.json}}},
          {"config", to_json(summary.config)}};
}

}  // namespace ck
