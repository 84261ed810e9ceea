#include "chernoff_kit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "chernoff_kit/chernoff.hpp"

namespace ck {

ApproximatingFamily ApproximatingFamily::constant(const StateVector& f, const StateVector& g) {
  return {[f](double) { return f; }, f, g};
}

bool decreasing_tail(const std::vector<double>& values, std::size_t tail, double floor) {
  if (values.empty()) return false;
  const std::size_t first = values.size() > tail ? values.size() - tail : 0;
  for (std::size_t i = first + 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1] || values[i] <= floor)) return false;
  }
  return true;
}

ProbeReport effective_derivative_probe(const ChernoffFn& f, const ApproximatingFamily& family,
                                       const std::vector<double>& s_grid, const SeminormFamily& seminorms) {
  ProbeReport report;
  report.s_grid = s_grid;
  report.seminorms = seminorms.labels();
  const std::size_t na = seminorms.size();
  report.approximation_error.assign(na, {});
  report.quotient_error.assign(na, {});
  for (std::size_t a = 0; a < na; ++a) {
    report.tolerance.push_back(1e-6 * (1.0 + seminorms.evaluate(a, family.claimed_limit.coords())));
  }
  bool ok = !s_grid.empty();
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    if (!(s > 0.0) || (i > 0 && !(s < s_grid[i - 1]))) {
      throw InvalidArgument("effective_derivative_probe: s_grid must be positive and strictly decreasing");
    }
    try {
      const StateVector fs = family.build(s);
      const Vector quotient = (f.at(s)(fs.coords()) - fs.coords()) / s;
      report.quotients.push_back(fs.with_coords(quotient));
      for (std::size_t a = 0; a < na; ++a) {
        report.approximation_error[a].push_back(seminorms.evaluate(a, fs.coords() - family.target.coords()));
        report.quotient_error[a].push_back(seminorms.evaluate(a, quotient - family.claimed_limit.coords()));
      }
    } catch (const Error&) {
      // Probe failures are verdicts; keep the curves aligned with s_grid.
      ok = false;
      report.quotients.push_back(family.target);
      for (std::size_t a = 0; a < na; ++a) {
        report.approximation_error[a].push_back(INFINITY);
        report.quotient_error[a].push_back(INFINITY);
      }
    }
  }
  for (std::size_t a = 0; ok && a < na; ++a) {
    const double tol = report.tolerance[a];
    for (const auto* curve : {&report.approximation_error[a], &report.quotient_error[a]}) {
      ok = ok && curve->back() <= tol && decreasing_tail(*curve, 3, tol);
    }
  }
  report.pass = ok;
  return report;
}

namespace {

std::vector<double> sorted_eps(std::vector<double> eps_grid) {
  for (double e : eps_grid) {
    if (!(e > 0.0)) throw InvalidArgument("consistency eps values must be positive");
  }
  std::sort(eps_grid.begin(), eps_grid.end(), std::greater<>());
  eps_grid.erase(std::unique(eps_grid.begin(), eps_grid.end()), eps_grid.end());
  return eps_grid;
}

bool curves_decrease(const ConsistencyCurve& curve, double floor) {
  bool ok = !curve.eps_grid.empty();
  for (const auto& dev : curve.max_deviation) ok = ok && decreasing_tail(dev, 3, floor);
  return ok;
}

}  // namespace

ConsistencyCurve small_step_consistency(const ChernoffFn& f, const StateVector& g, std::vector<double> eps_grid,
                                        const SeminormFamily& seminorms, Exec exec) {
  static constexpr std::size_t kPowers[] = {1, 2, 3, 4, 6, 8, 12, 16, 24, 32};
  static constexpr double kFractions[] = {1.0, 0.75, 0.5, 0.25};
  constexpr std::size_t np = std::size(kPowers);
  constexpr std::size_t nf = std::size(kFractions);

  ConsistencyCurve curve;
  curve.eps_grid = sorted_eps(std::move(eps_grid));
  curve.seminorms = seminorms.labels();
  const std::size_t na = seminorms.size();
  const std::size_t cells = curve.eps_grid.size() * np * nf;
  std::vector<std::vector<double>> cell_dev(cells, std::vector<double>(na, 0.0));

  for_each_index(exec, cells, [&](std::size_t c) {
    const std::size_t e = c / (np * nf);
    const std::size_t i = kPowers[(c / nf) % np];
    const double step = kFractions[c % nf] * curve.eps_grid[e] / static_cast<double>(i);
    const StepOp op = f.at(step);
    Vector y = g.coords();
    for (std::size_t k = 0; k < i; ++k) y = op(y);
    const Vector diff = y - g.coords();
    for (std::size_t a = 0; a < na; ++a) cell_dev[c][a] = seminorms.evaluate(a, diff);
  });

  curve.max_deviation.assign(na, std::vector<double>(curve.eps_grid.size(), 0.0));
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t e = c / (np * nf);
    for (std::size_t a = 0; a < na; ++a) curve.max_deviation[a][e] = std::max(curve.max_deviation[a][e], cell_dev[c][a]);
  }
  curve.samples = cells;
  curve.pass = curves_decrease(curve, 1e-13 * (1.0 + g.coords().norm()));
  return curve;
}

ConsistencyCurve step_difference_consistency(const ChernoffFn& f, const StateVector& g, double s,
                                             std::vector<double> eps_grid, const SeminormFamily& seminorms,
                                             Exec exec) {
  static constexpr double kFractions[] = {1.0, 0.5, 0.25, 0.125};
  constexpr std::size_t nf = std::size(kFractions);
  constexpr std::size_t kMaxPowers = 1 << 14;
  if (!(s > 0.0)) throw InvalidArgument("step_difference_consistency needs s > 0");

  ConsistencyCurve curve;
  curve.eps_grid = sorted_eps(std::move(eps_grid));
  curve.seminorms = seminorms.labels();
  const std::size_t na = seminorms.size();
  const std::size_t cells = curve.eps_grid.size() * nf;
  std::vector<std::vector<double>> cell_dev(cells, std::vector<double>(na, 0.0));
  std::vector<std::size_t> cell_samples(cells, 0);

  for_each_index(exec, cells, [&](std::size_t c) {
    const double eps = curve.eps_grid[c / nf];
    const double step = std::min(kFractions[c % nf] * eps, s);
    const auto window = static_cast<std::size_t>(std::floor(eps / step * (1.0 + 1e-12)));
    const auto count = std::min(static_cast<std::size_t>(std::floor(s / step * (1.0 + 1e-12))), kMaxPowers);
    const StepOp op = f.at(step);
    // Ring of the last window + 1 powers.
    std::vector<Vector> ring(window + 1);
    ring[0] = g.coords();
    Vector diff(g.dim());
    for (std::size_t l = 1; l <= count; ++l) {
      ring[l % ring.size()] = op(ring[(l - 1) % ring.size()]);
      const std::size_t first = l > window ? l - window : 0;
      for (std::size_t i = first; i < l; ++i) {
        diff.noalias() = ring[l % ring.size()] - ring[i % ring.size()];
        for (std::size_t a = 0; a < na; ++a) cell_dev[c][a] = std::max(cell_dev[c][a], seminorms.evaluate(a, diff));
        ++cell_samples[c];
      }
    }
  });

  curve.max_deviation.assign(na, std::vector<double>(curve.eps_grid.size(), 0.0));
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t e = c / nf;
    curve.samples += cell_samples[c];
    for (std::size_t a = 0; a < na; ++a) curve.max_deviation[a][e] = std::max(curve.max_deviation[a][e], cell_dev[c][a]);
  }
  curve.pass = curves_decrease(curve, 1e-13 * (1.0 + g.coords().norm()));
  return curve;
}

StabilityFit fit_stability(std::vector<NormSample> samples, double horizon) {
  StabilityFit fit;
  double a_env = 0.0;
  double max_at_zero = 1.0;
  std::vector<std::pair<double, double>> points;
  for (const auto& s : samples) {
    if (!std::isfinite(s.norm)) {
      fit.M = INFINITY;
      fit.a = INFINITY;
      fit.samples = std::move(samples);
      return fit;
    }
    if (s.norm <= 0.0) continue;
    if (s.tau <= 0.0) {
      max_at_zero = std::max(max_at_zero, s.norm);
      continue;
    }
    const double log_norm = std::log(s.norm);
    a_env = std::max(a_env, log_norm / s.tau);
    points.emplace_back(s.tau, log_norm);
  }
  if (points.empty()) {
    fit.M = max_at_zero;
    fit.a = 0.0;
    fit.samples = std::move(samples);
    return fit;
  }
  fit.M = max_at_zero;
  fit.a = a_env;

  // A steeper least-squares rate with M > 1 is used only to absorb transient growth.
  if (a_env > 0.0 && points.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : points) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(points.size());
    my /= static_cast<double>(points.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (y - my);
    }
    if (sxx > 0.0) {
      const double a_ls = sxy / sxx;
      double log_m = std::log(max_at_zero);
      for (const auto& [x, y] : points) log_m = std::max(log_m, y - a_ls * x);
      const double env_bound = std::log(max_at_zero) + a_env * horizon;
      if (log_m + a_ls * horizon < env_bound - 0.01) {
        fit.M = std::exp(log_m);
        fit.a = a_ls;
      }
    }
  }
  fit.samples = std::move(samples);
  return fit;
}

namespace {

std::vector<std::size_t> sampled_powers(std::size_t cap) {
  std::vector<std::size_t> out;
  for (std::size_t m = 1; m <= cap; m = std::max(m + 1, static_cast<std::size_t>(std::ceil(1.5 * static_cast<double>(m))))) {
    out.push_back(m);
  }
  if (cap > 0 && (out.empty() || out.back() != cap)) out.push_back(cap);
  return out;
}

Vector random_unit(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(normal(rng), normal(rng));
  return v / v.norm();
}

Vector power_apply(const StepOp& op, Vector v, std::size_t m) {
  for (std::size_t k = 0; k < m; ++k) v = op(v);
  return v;
}

}  // namespace

StabilityFit stability_estimate(const ChernoffFn& f, const LatticeSpec& lattice, std::size_t trials, std::uint64_t seed,
                                Exec exec) {
  constexpr int kIterations = 20;
  const auto& steps = lattice.steps();
  if (steps.empty()) throw InvalidArgument("stability_estimate needs a nonempty lattice");
  trials = std::max<std::size_t>(trials, 1);
  const bool adjoint = f.has_adjoint();
  std::vector<std::vector<NormSample>> per_step(steps.size());

  for_each_index(exec, steps.size(), [&](std::size_t i) {
    const StepOp op = f.at(steps[i]);
    const StepOp op_adj = adjoint ? f.adjoint_at(steps[i]) : StepOp{};
    for (std::size_t m : sampled_powers(lattice.power_caps()[i])) {
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)) ^ (m << 20));
      double best = 0.0;
      for (std::size_t trial = 0; trial < trials; ++trial) {
        Vector v = random_unit(rng, f.dim());
        for (int it = 0; it < kIterations; ++it) {
          const Vector w = power_apply(op, v, m);
          const double nu = w.norm();
          best = std::max(best, nu);
          if (nu == 0.0) break;
          Vector next = adjoint ? power_apply(op_adj, w, m) : w;
          const double len = next.norm();
          if (len == 0.0 || !std::isfinite(len)) break;
          v = next / len;
        }
      }
      per_step[i].push_back({static_cast<double>(m) * steps[i], best});
    }
  });

  std::vector<NormSample> samples{{0.0, 1.0}};
  for (auto& s : per_step) samples.insert(samples.end(), s.begin(), s.end());
  StabilityFit fit = fit_stability(std::move(samples), lattice.s_max());
  fit.used_adjoint = adjoint;
  return fit;
}

RegularityTable regularity_check(const ChernoffFn& f, const LinOp& z, const StateVector& h, double t0, std::size_t n,
                                 std::vector<double> t_grid, const SeminormFamily& seminorms) {
  std::sort(t_grid.begin(), t_grid.end());
  t_grid.erase(std::unique(t_grid.begin(), t_grid.end()), t_grid.end());
  if (t_grid.size() < 2) throw InvalidArgument("regularity_check needs at least two t values");
  std::vector<double> refined;
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
    refined.push_back(t_grid[i]);
    refined.push_back(0.5 * (t_grid[i] + t_grid[i + 1]));
  }
  refined.push_back(t_grid.back());

  auto modulus = [&](const std::vector<double>& grid, double& delta) {
    const auto path = derivative_path(f, z, t0, n, grid, h);
    std::vector<double> out(seminorms.size(), 0.0);
    delta = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      delta = std::max(delta, grid[i + 1] - grid[i]);
      const Vector diff = path[i + 1].coords() - path[i].coords();
      for (std::size_t a = 0; a < seminorms.size(); ++a) out[a] = std::max(out[a], seminorms.evaluate(a, diff));
    }
    return out;
  };

  RegularityTable table;
  table.seminorms = seminorms.labels();
  table.modulus = modulus(t_grid, table.delta);
  table.refined_modulus = modulus(refined, table.refined_delta);
  const double floor = 1e-13 * (1.0 + z.apply(h.coords()).norm());
  table.pass = true;
  for (std::size_t a = 0; a < seminorms.size(); ++a) {
    const bool shrinks = table.refined_modulus[a] <= 0.75 * table.modulus[a];
    const bool negligible = table.modulus[a] <= floor && table.refined_modulus[a] <= floor;
    table.pass = table.pass && (shrinks || negligible);
  }
  return table;
}

}  // namespace ck
