#include "chernoff_kit/convergence.hpp"

#include <algorithm>
#include <cmath>

#include "chernoff_kit/chernoff.hpp"

namespace ck {

std::vector<double> ConvergenceReport::uniform_curve(std::size_t alpha) const {
  std::vector<double> out(n_grid.size());
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) out[ni] = uniform_error(alpha, ni);
  return out;
}

double ConvergenceReport::max_error() const {
  double m = 0.0;
  for (double e : errors) m = std::max(m, e);
  return m;
}

ConvergenceReport chernoff_converge(const ChernoffFn& f, const std::optional<SemigroupEvaluator>& reference,
                                    const StateVector& h, double t0, const std::vector<std::size_t>& n_grid,
                                    const std::vector<double>& t_grid, const SeminormFamily& seminorms,
                                    const ConvergeOptions& options) {
  if (n_grid.empty() || t_grid.empty()) throw InvalidArgument("chernoff_converge needs nonempty n and t grids");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw InvalidArgument("chernoff_converge: n_grid must be positive and increasing");
    }
  }
  for (double t : t_grid) {
    if (!(t >= 0.0) || t > t0) throw InvalidArgument("chernoff_converge: t=" + std::to_string(t) + " outside [0, t0]");
  }
  require_dim("chernoff_converge (" + f.label() + ")", f.dim(), h.dim());

  const std::size_t nt = t_grid.size();
  const std::size_t nn = n_grid.size();
  const std::size_t na = seminorms.size();

  std::vector<Vector> refs(nt);
  if (reference) {
    for_each_index(options.exec, nt, [&](std::size_t ti) { refs[ti] = reference->apply(t_grid[ti], h).coords(); });
  }

  // Every (t, n) cell is independent; results are stored per cell and reduced in fixed order.
  std::vector<Vector> products(nt * nn);
  for_each_index(options.exec, nt * nn, [&](std::size_t c) {
    const std::size_t ti = c / nn;
    const std::size_t ni = c % nn;
    products[c] = product_apply(f, t_grid[ti], n_grid[ni], h).value.coords();
  });

  ConvergenceReport report;
  report.seminorms = seminorms.labels();
  report.t_grid = t_grid;
  report.self_referenced = !reference;
  const std::size_t first = reference ? 0 : 1;
  if (nn <= first) throw InvalidArgument("self-referenced convergence needs at least two n values");
  report.n_grid.assign(n_grid.begin() + static_cast<long>(first), n_grid.end());
  const std::size_t nr = report.n_grid.size();

  report.errors.assign(na * nt * nr, 0.0);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t ti = 0; ti < nt; ++ti) {
      for (std::size_t ni = first; ni < nn; ++ni) {
        const Vector& against = reference ? refs[ti] : products[ti * nn + ni - 1];
        report.errors[(a * nt + ti) * nr + (ni - first)] = seminorms.evaluate(a, products[ti * nn + ni] - against);
      }
    }
  }
  report.uniform_errors.assign(na * nr, 0.0);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t ni = 0; ni < nr; ++ni) {
      double m = 0.0;
      for (std::size_t ti = 0; ti < nt; ++ti) m = std::max(m, report.error(a, ti, ni));
      report.uniform_errors[a * nr + ni] = m;
    }
    const auto curve = report.uniform_curve(a);
    report.fitted_rate.push_back(fit_rate(curve, report.n_grid, options.rate_floor));
  }
  if (options.stability_lattice) {
    report.stability_estimate =
        stability_estimate(f, *options.stability_lattice, options.stability_trials, options.stability_seed, options.exec);
  }
  return report;
}

UniquenessReport uniqueness_cross_check(const std::vector<ChernoffFn>& functions, const StateVector& h, double t0,
                                        std::size_t n_big, const std::vector<double>& t_grid,
                                        const SeminormFamily& seminorms, Exec exec) {
  if (functions.size() < 2) throw InvalidArgument("uniqueness_cross_check needs at least two Chernoff functions");
  for (const auto& f : functions) require_dim("uniqueness_cross_check (" + f.label() + ")", h.dim(), f.dim());

  std::vector<std::vector<StateVector>> paths(functions.size());
  for_each_index(exec, functions.size(),
                 [&](std::size_t i) { paths[i] = product_path(functions[i], t0, n_big, t_grid, h); });

  UniquenessReport report;
  for (const auto& f : functions) report.labels.push_back(f.label());
  for (std::size_t i = 0; i < functions.size(); ++i) {
    for (std::size_t j = i + 1; j < functions.size(); ++j) {
      double dev = 0.0;
      for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        const Vector diff = paths[i][ti].coords() - paths[j][ti].coords();
        for (std::size_t a = 0; a < seminorms.size(); ++a) dev = std::max(dev, seminorms.evaluate(a, diff));
      }
      report.pair_deviation.push_back(dev);
      report.max_deviation = std::max(report.max_deviation, dev);
    }
  }
  return report;
}

}  // namespace ck
