#include "chernoff_kit/trotter_kato.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <optional>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "chernoff_kit/expm.hpp"

namespace ck {

GeneratorFamily GeneratorFamily::linear(const LinOp& z0, const LinOp& w, std::vector<double> s_grid) {
  require_dim("GeneratorFamily::linear", z0.dim(), w.dim());
  const bool structured = z0.kind() == w.kind() &&
                          (z0.kind() == OpKind::diagonal || z0.kind() == OpKind::spectral_multiplier);
  if (structured) {
    return {[z0, w](double s) { return s == 0.0 ? z0 : z0 + w.scaled(s); }, std::move(s_grid), "Z0+sW"};
  }
  auto base = std::make_shared<const Matrix>(z0.to_dense());
  auto perturbation = std::make_shared<const Matrix>(w.to_dense());
  return {[base, perturbation](double s) { return LinOp::dense(*base + s * *perturbation); }, std::move(s_grid),
          "Z0+sW"};
}

std::vector<double> GeneratorFamily::default_s_grid() {
  std::vector<double> out;
  for (int k = 1; k <= 10; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

Index GeneratorFamily::dim() const { return at(0.0).dim(); }

namespace {

void require_s_grid(const GeneratorFamily& family) {
  if (family.s_grid.empty()) throw InvalidArgument("generator family has an empty s_grid");
  const Index n = family.dim();
  for (double s : family.s_grid) {
    if (!(s > 0.0)) throw InvalidArgument("generator family s_grid must be positive (s = 0 is implicit)");
    require_dim("generator family at s=" + std::to_string(s), n, family.at(s).dim());
  }
}

}  // namespace

EquicontinuityReport family_equicontinuity(const GeneratorFamily& family, double l0, std::size_t l_count,
                                           double bound_cap, Exec exec) {
  require_s_grid(family);
  if (!(l0 > 0.0) || l_count == 0) throw InvalidArgument("family_equicontinuity needs l0 > 0 and l_count >= 1");
  std::vector<double> s_values = family.s_grid;
  s_values.push_back(0.0);
  const double dl = l0 / static_cast<double>(l_count);
  // Per s: exp(k dl Z_s) for k = 1..l_count as powers of exp(dl Z_s).
  std::vector<std::vector<NormSample>> per_s(s_values.size());
  for_each_index(exec, s_values.size(), [&](std::size_t si) {
    auto& out = per_s[si];
    try {
      const LinOp step = propagator(family.at(s_values[si]), dl);
      if (step.kind() == OpKind::dense) {
        Matrix power = step.matrix();
        for (std::size_t k = 1; k <= l_count; ++k) {
          if (k > 1) power = step.matrix() * power;
          out.push_back({dl * static_cast<double>(k), power.allFinite() ? operator_norm(LinOp::dense(power)) : INFINITY});
        }
      } else {
        for (std::size_t k = 1; k <= l_count; ++k) {
          out.push_back({dl * static_cast<double>(k), operator_norm(propagator(family.at(s_values[si]),
                                                                               dl * static_cast<double>(k)))});
        }
      }
    } catch (const NonFiniteValue&) {
      out.push_back({dl, INFINITY});
    }
  });
  std::vector<NormSample> samples{{0.0, 1.0}};
  for (const auto& v : per_s) samples.insert(samples.end(), v.begin(), v.end());

  EquicontinuityReport report;
  report.fit = fit_stability(std::move(samples), l0);
  report.bound = report.fit.M * std::exp(report.fit.a * l0);
  report.pass = std::isfinite(report.fit.M) && std::isfinite(report.fit.a) && std::isfinite(report.bound) &&
                report.bound <= bound_cap;
  return report;
}

CoreReport core_condition_check(const GeneratorFamily& family, const std::vector<CoreWitness>& witnesses,
                                const std::vector<StateVector>& density_basis, const SeminormFamily& seminorms) {
  require_s_grid(family);
  if (witnesses.empty()) throw InvalidArgument("core_condition_check needs at least one witness");
  const Index n = family.dim();
  const LinOp z0 = family.at(0.0);

  CoreReport report;
  for (const auto& w : witnesses) {
    require_dim("core witness", n, w.f.dim());
    const Vector z0f = z0.apply(w.f.coords());
    std::vector<std::vector<double>> approx(seminorms.size()), graph(seminorms.size());
    bool finite = true;
    for (double s : family.s_grid) {
      const Vector fs = w.family(s).coords();
      const Vector zs_fs = family.at(s).apply(fs);
      finite = finite && all_finite(fs) && all_finite(zs_fs);
      for (std::size_t a = 0; a < seminorms.size(); ++a) {
        approx[a].push_back(seminorms.evaluate(a, fs - w.f.coords()));
        graph[a].push_back(seminorms.evaluate(a, zs_fs - z0f));
      }
    }
    bool ok = finite;
    const double floor = 1e-13 * (1.0 + w.f.coords().norm() + z0f.norm());
    for (std::size_t a = 0; a < seminorms.size(); ++a) {
      ok = ok && decreasing_tail(approx[a], 4, floor) && decreasing_tail(graph[a], 4, floor);
    }
    report.witness_converges.push_back(ok);
  }

  // Span test through Gram-matrix ranks: span(witnesses) must contain span(basis).
  auto gram_rank = [](const Matrix& cols) -> Index {
    if (cols.cols() == 0) return 0;
    const Matrix gram = cols.adjoint() * cols;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (top == 0.0) return 0;
    Index rank = 0;
    for (Index i = 0; i < eig.eigenvalues().size(); ++i) rank += eig.eigenvalues()(i) > kGramRankTolerance * top;
    return rank;
  };
  Matrix w(n, static_cast<Index>(witnesses.size()));
  for (std::size_t i = 0; i < witnesses.size(); ++i) w.col(static_cast<Index>(i)) = witnesses[i].f.coords();
  Matrix combined(n, w.cols() + static_cast<Index>(density_basis.size()));
  combined.leftCols(w.cols()) = w;
  for (std::size_t i = 0; i < density_basis.size(); ++i) {
    require_dim("density basis", n, density_basis[i].dim());
    combined.col(w.cols() + static_cast<Index>(i)) = density_basis[i].coords();
  }
  report.witness_rank = gram_rank(w);
  report.combined_rank = gram_rank(combined);
  report.spans = report.witness_rank == report.combined_rank;
  report.pass = report.spans && std::all_of(report.witness_converges.begin(), report.witness_converges.end(),
                                            [](bool b) { return b; });
  return report;
}

namespace {

// exp(l Z) f for every l in l_grid, stepping through the sorted grid and reusing
// propagators for repeated increments.
std::vector<Vector> propagate_along(const LinOp& z, const Vector& f, const std::vector<double>& l_grid) {
  std::vector<std::size_t> order(l_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return l_grid[a] < l_grid[b]; });
  std::vector<std::pair<double, LinOp>> cache;
  std::vector<Vector> out(l_grid.size());
  Vector current = f;
  double at = 0.0;
  for (std::size_t idx : order) {
    const double dl = l_grid[idx] - at;
    if (dl > 0.0) {
      const LinOp* step = nullptr;
      for (const auto& [key, op] : cache) {
        if (std::abs(key - dl) <= 1e-14 * std::max(1.0, dl)) step = &op;
      }
      if (!step) {
        cache.emplace_back(dl, propagator(z, dl));
        step = &cache.back().second;
      }
      current = step->apply(current);
      at = l_grid[idx];
    }
    out[idx] = current;
  }
  return out;
}

}  // namespace

SweepReport semigroup_convergence_sweep(const GeneratorFamily& family, const StateVector& f, double t0,
                                        const std::vector<double>& l_grid, const SeminormFamily& seminorms,
                                        Exec exec) {
  require_s_grid(family);
  if (l_grid.empty()) throw InvalidArgument("sweep needs a nonempty l_grid");
  for (double l : l_grid) {
    if (!(l >= 0.0) || l > t0) throw InvalidArgument("sweep l=" + std::to_string(l) + " outside [0, t0]");
  }
  const std::vector<Vector> refs = propagate_along(family.at(0.0), f.coords(), l_grid);

  const std::size_t ns = family.s_grid.size();
  const std::size_t nl = l_grid.size();
  const std::size_t na = seminorms.size();
  std::vector<std::vector<double>> per_s(ns, std::vector<double>(na, 0.0));
  for_each_index(exec, ns, [&](std::size_t si) {
    try {
      const auto values = propagate_along(family.at(family.s_grid[si]), f.coords(), l_grid);
      for (std::size_t li = 0; li < nl; ++li) {
        const Vector diff = values[li] - refs[li];
        for (std::size_t a = 0; a < na; ++a) {
          const double e = all_finite(diff) ? seminorms.evaluate(a, diff) : INFINITY;
          per_s[si][a] = std::max(per_s[si][a], e);
        }
      }
    } catch (const NonFiniteValue&) {
      for (auto& e : per_s[si]) e = INFINITY;
    }
  });

  SweepReport report;
  report.s_grid = family.s_grid;
  report.seminorms = seminorms.labels();
  report.sup_error.assign(na, std::vector<double>(ns, 0.0));
  for (std::size_t si = 0; si < ns; ++si) {
    for (std::size_t a = 0; a < na; ++a) report.sup_error[a][si] = per_s[si][a];
  }
  const double floor = 1e-13 * (1.0 + f.coords().norm());
  report.pass = true;
  for (const auto& curve : report.sup_error) report.pass = report.pass && decreasing_tail(curve, 4, floor);
  return report;
}

namespace {

// Trapezoid weights on [s1, s2] applied to T(s1 + k h) f = T(h)^k T(s1) f.
Vector trapezoid(const LinOp& step, const Vector& start, double width, std::size_t intervals) {
  const double h = width / static_cast<double>(intervals);
  Vector node = start;
  Vector sum = 0.5 * node;
  for (std::size_t k = 1; k <= intervals; ++k) {
    node = step.apply(node);
    sum += (k == intervals ? 0.5 : 1.0) * node;
  }
  return h * sum;
}

}  // namespace

IntegralElement core_elements_from_integrals(const SemigroupEvaluator& semigroup, const StateVector& f, double s1,
                                             double s2, std::size_t quadrature_n) {
  if (!(s1 >= 0.0) || !(s2 > s1)) throw InvalidArgument("core element integral needs 0 <= s1 < s2");
  if (quadrature_n < 2) throw InvalidArgument("core element integral needs quadrature_n >= 2");
  require_dim("core_elements_from_integrals", semigroup.dim(), f.dim());
  const double h = (s2 - s1) / static_cast<double>(quadrature_n);
  const LinOp step = semigroup.at(h);
  const Vector start = semigroup.at(s1).apply(f.coords());
  const Vector integral = trapezoid(step, start, s2 - s1, quadrature_n);
  const Vector exact_image = semigroup.at(s2).apply(f.coords()) - start;
  IntegralElement out{f.with_coords(integral), (semigroup.generator().apply(integral) - exact_image).norm()};
  return out;
}

namespace {

// Trapezoid rule for int_0^width exp(l Z) dl as an operator.
LinOp integral_operator(const LinOp& z, double width, std::size_t intervals) {
  const double h = width / static_cast<double>(intervals);
  if (z.kind() == OpKind::diagonal || z.kind() == OpKind::spectral_multiplier) {
    const Vector& d = z.kind() == OpKind::diagonal ? z.diagonal_entries() : z.symbol();
    Vector sum = Vector::Zero(d.size());
    for (std::size_t k = 0; k <= intervals; ++k) {
      const double w = (k == 0 || k == intervals) ? 0.5 : 1.0;
      sum += w * (static_cast<double>(k) * h * d).array().exp().matrix();
    }
    return z.with_values(h * sum);
  }
  const Matrix step = expm(h * z.to_dense());
  const Index n = step.rows();
  Matrix node = Matrix::Identity(n, n);
  Matrix sum = 0.5 * node;
  for (std::size_t k = 1; k <= intervals; ++k) {
    node = step * node;
    sum += (k == intervals ? 0.5 : 1.0) * node;
  }
  return LinOp::dense(h * sum);
}

}  // namespace

std::vector<CoreWitness> integral_witnesses(const GeneratorFamily& family, const std::vector<StateVector>& basis,
                                            double width, std::size_t quadrature_n, WitnessSource source) {
  if (!(width > 0.0) || quadrature_n < 2) throw InvalidArgument("integral_witnesses needs width > 0, n >= 2");
  // Integral operators on the sampled s values are shared by all witnesses.
  auto cache = std::make_shared<std::vector<std::pair<double, LinOp>>>();
  cache->emplace_back(0.0, integral_operator(family.at(0.0), width, quadrature_n));
  for (double s : family.s_grid) cache->emplace_back(s, integral_operator(family.at(s), width, quadrature_n));
  auto lookup = [cache, family, width, quadrature_n](double s) {
    for (const auto& [key, q] : *cache) {
      if (key == s) return q;
    }
    return integral_operator(family.at(s), width, quadrature_n);
  };
  const LinOp& q0 = cache->front().second;
  std::optional<Eigen::PartialPivLU<Matrix>> lu;
  if (source == WitnessSource::preimage && q0.kind() == OpKind::dense) lu.emplace(q0.matrix());
  std::vector<CoreWitness> out;
  out.reserve(basis.size());
  for (const auto& b : basis) {
    Vector g = b.coords();
    if (source == WitnessSource::preimage) {
      if (q0.kind() == OpKind::diagonal) {
        g = g.cwiseQuotient(q0.diagonal_entries());
      } else if (q0.kind() == OpKind::spectral_multiplier) {
        g = q0.with_values(q0.symbol().cwiseInverse()).apply(g);
      } else {
        g = lu->solve(g);
      }
      ensure_finite(g, "integral witness preimage");
    }
    const StateVector gs = b.with_coords(std::move(g));
    out.push_back({gs.with_coords(q0.apply(gs.coords())),
                   [lookup, gs](double s) { return gs.with_coords(lookup(s).apply(gs.coords())); }});
  }
  return out;
}

std::vector<StateVector> standard_basis(Index dim) {
  auto space = Space::coordinates(dim);
  std::vector<StateVector> out;
  for (Index i = 0; i < dim; ++i) out.emplace_back(space, Vector::Unit(dim, i));
  return out;
}

}  // namespace ck

namespace ck {

LinOp propagator(const LinOp& z, double l) {
  if (z.kind() == OpKind::diagonal || z.kind() == OpKind::spectral_multiplier) {
    const Vector& d = z.kind() == OpKind::diagonal ? z.diagonal_entries() : z.symbol();
    Vector values = (l * d).array().exp().matrix();
    ensure_finite(values, "propagator");
    return z.with_values(std::move(values));
  }
  const Matrix dense = z.to_dense();
  if (!dense.allFinite()) throw NonFiniteValue("propagator: non-finite generator");
  Matrix t = expm(l * dense);
  if (!t.allFinite()) throw NonFiniteValue("propagator: exponential overflow");
  return LinOp::dense(std::move(t));
}

double operator_norm(const LinOp& op) {
  if (op.kind() == OpKind::diagonal) return op.diagonal_entries().cwiseAbs().maxCoeff();
  if (op.kind() == OpKind::spectral_multiplier) return op.symbol().cwiseAbs().maxCoeff();
  const Matrix m = op.to_dense();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.adjoint() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

}  // namespace ck
