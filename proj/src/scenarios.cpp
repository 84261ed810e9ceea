#include "chernoff_kit/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <Eigen/SVD>

#include "chernoff_kit/trotter_kato.hpp"

namespace ck {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> default_t_grid(double t0, std::size_t points = 11) {
  std::vector<double> out;
  for (std::size_t i = 0; i < points; ++i) out.push_back(t0 * static_cast<double>(i) / static_cast<double>(points - 1));
  out.back() = t0;
  return out;
}

std::vector<std::size_t> geometric_n_grid(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t n = lo; n <= hi; n *= 2) out.push_back(n);
  return out;
}

Vector random_complex(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(normal(rng), normal(rng));
  return v;
}

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

void require_power_of_two(Index n, const char* who) {
  if (n < 4 || (n & (n - 1)) != 0) {
    throw InvalidArgument(std::string(who) + ": grid size must be a power of two >= 4, got " + std::to_string(n));
  }
}

std::string radius_label(double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "sup_r=%g", r);
  return buf;
}

const std::map<std::string, std::string> kAllPass = {
    {"converge", "pass"}, {"unique", "pass"}, {"tk", "pass"}, {"diagnostics", "pass"}};

}  // namespace

std::vector<std::string> builtin_scenarios() { return {"heat", "schrodinger", "dissipative", "mult-example"}; }

Vector periodic_grid(Index n) {
  Vector x(n);
  for (Index j = 0; j < n; ++j) x(j) = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
  return x;
}

Vector laplacian_symbol(Index n) {
  Vector symbol(n);
  for (Index j = 0; j < n; ++j) {
    const double k = static_cast<double>(j <= n / 2 ? j : j - n);
    symbol(j) = -k * k;
  }
  return symbol;
}

Vector gaussian_packet(Index n, double center, double width, double wavenumber) {
  const Vector x = periodic_grid(n);
  Vector h(n);
  for (Index j = 0; j < n; ++j) {
    const double d = x(j).real() - center;
    h(j) = std::exp(-d * d / (2.0 * width * width)) * std::polar(1.0, wavenumber * x(j).real());
  }
  return h / h.norm();
}

void Scenario::validate(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& f : chernoff) {
    require_dim("scenario " + name + " Chernoff function " + f.label(), dim(), f.dim());
    const Vector x = random_complex(rng, dim());
    if (f.at(0.0)(x) != x) throw Error("scenario " + name + ": F(0) != I for " + f.label());
  }
  for (int trial = 0; trial < 3; ++trial) {
    const Vector x = random_complex(rng, dim());
    const double l = unit(rng) * t0;
    const double m = unit(rng) * t0;
    const Vector joint = reference.at(l + m).apply(x);
    const Vector split = reference.at(l).apply(reference.at(m).apply(x));
    const double gap = (joint - split).norm();
    if (!(gap <= 1e-10 * (1.0 + x.norm()))) {
      throw Error("scenario " + name + ": semigroup law violated by " + std::to_string(gap));
    }
    if ((reference.at(0.0).apply(x) - x).norm() > 1e-14 * x.norm()) {
      throw Error("scenario " + name + ": reference T(0) != I");
    }
  }
}

Scenario build_heat_potential(Index n, const Eigen::VectorXd& potential) {
  require_power_of_two(n, "heat");
  require_dim("heat potential", n, potential.size());
  auto space = Space::make("periodic-grid-" + std::to_string(n), n, Field::real);
  const LinOp a = LinOp::spectral_multiplier(laplacian_symbol(n));
  const LinOp b = LinOp::diagonal(-potential.cast<Scalar>());
  const double growth = std::max(0.0, -potential.minCoeff());
  const Stability stability{1.0, growth};
  SemigroupEvaluator ta(a, SemigroupMethod::spectral, Stability{1.0, 0.0});
  SemigroupEvaluator tb(b, SemigroupMethod::spectral, Stability{1.0, growth});
  const LinOp z = a + b;
  SemigroupEvaluator reference(z, SemigroupMethod::dense_expm, stability);
  std::vector<ChernoffFn> chernoff{lie_trotter(ta, tb), implicit_euler(z)};
  Vector h = gaussian_packet(n, std::numbers::pi, 0.5);
  return Scenario{.name = "heat",
                  .space = space,
                  .generator = z,
                  .part_a = a,
                  .part_b = b,
                  .chernoff = std::move(chernoff),
                  .reference = std::move(reference),
                  .seminorms = SeminormFamily::standard(n),
                  .initial = StateVector(space, std::move(h)),
                  .t0 = 1.0,
                  .n_grid = geometric_n_grid(16, 1024),
                  .t_grid = default_t_grid(1.0),
                  .expected = kAllPass,
                  .density_basis = standard_basis(n),
                  .nodes = {},
                  .radii = {}};
}

Scenario build_schrodinger(Index n, const Eigen::VectorXd& potential) {
  require_power_of_two(n, "schrodinger");
  require_dim("schrodinger potential", n, potential.size());
  auto space = Space::make("periodic-grid-" + std::to_string(n), n, Field::complex);
  const Scalar i(0.0, 1.0);
  const LinOp a = LinOp::spectral_multiplier(i * laplacian_symbol(n));
  const LinOp b = LinOp::diagonal(-i * potential.cast<Scalar>());
  SemigroupEvaluator ta(a, SemigroupMethod::spectral, Stability{1.0, 0.0});
  SemigroupEvaluator tb(b, SemigroupMethod::spectral, Stability{1.0, 0.0});
  const LinOp z = a + b;
  SemigroupEvaluator reference(z, SemigroupMethod::dense_expm, Stability{1.0, 0.0});
  std::vector<ChernoffFn> chernoff{lie_trotter(ta, tb), implicit_euler(z)};
  Vector h = gaussian_packet(n, std::numbers::pi / 2.0, 0.5, 2.0);
  return Scenario{.name = "schrodinger",
                  .space = space,
                  .generator = z,
                  .part_a = a,
                  .part_b = b,
                  .chernoff = std::move(chernoff),
                  .reference = std::move(reference),
                  .seminorms = SeminormFamily::standard(n),
                  .initial = StateVector(space, std::move(h)),
                  .t0 = 0.5,
                  .n_grid = geometric_n_grid(1024, 16384),
                  .t_grid = default_t_grid(0.5),
                  .expected = kAllPass,
                  .density_basis = standard_basis(n),
                  .nodes = {},
                  .radii = {}};
}

Scenario build_dissipative_random(Index dim, std::uint64_t seed, const DissipativeOptions& options) {
  if (dim < 2) throw InvalidArgument("dissipative scenario needs dim >= 2");
  if (options.skew_scale < 0.0 || options.damping_scale < 0.0) throw InvalidArgument("scales must be >= 0");
  auto space = Space::make("C^" + std::to_string(dim), dim, Field::complex);
  std::mt19937_64 rng(seed);
  Matrix g(dim, dim), c(dim, dim);
  for (Index j = 0; j < dim; ++j) g.col(j) = random_complex(rng, dim);
  for (Index j = 0; j < dim; ++j) c.col(j) = random_complex(rng, dim);

  Matrix skew = (g - g.adjoint()) / 2.0;
  skew = skew * (options.skew_scale / spectral_norm(skew));
  Matrix damping;
  if (options.identity_damping) {
    damping = options.damping_scale * Matrix::Identity(dim, dim);
  } else {
    damping = c * c.adjoint();
    damping = (damping + damping.adjoint()) / 2.0;
    damping = damping * (options.damping_scale / spectral_norm(damping));
  }
  const LinOp s = LinOp::dense(skew);
  const LinOp p = LinOp::dense(-damping);
  const LinOp z = LinOp::dense(skew - damping);
  SemigroupEvaluator ts(s, SemigroupMethod::dense_expm, Stability{1.0, 0.0});
  SemigroupEvaluator tp(p, SemigroupMethod::dense_expm, Stability{1.0, 0.0});
  SemigroupEvaluator reference(z, SemigroupMethod::dense_expm, Stability{1.0, 0.0});
  std::vector<ChernoffFn> chernoff{implicit_euler(z), lie_trotter(ts, tp)};
  Vector h = random_complex(rng, dim);
  h /= h.norm();
  return Scenario{.name = "dissipative",
                  .space = space,
                  .generator = z,
                  .part_a = s,
                  .part_b = p,
                  .chernoff = std::move(chernoff),
                  .reference = std::move(reference),
                  .seminorms = SeminormFamily::standard(dim),
                  .initial = StateVector(space, std::move(h)),
                  .t0 = 1.0,
                  .n_grid = geometric_n_grid(16, 1024),
                  .t_grid = default_t_grid(1.0),
                  .expected = kAllPass,
                  .density_basis = standard_basis(dim),
                  .nodes = {},
                  .radii = {}};
}

Scenario build_multiplication_example(std::vector<double> radii, std::size_t radial, std::size_t angular) {
  if (radii.empty()) throw InvalidArgument("multiplication example needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw InvalidArgument("multiplication example radii must be positive and increasing");
    }
  }
  if (radial < 1 || angular < 3) throw InvalidArgument("polar grid needs radial >= 1 and angular >= 3");
  const double r_max = radii.back();
  std::vector<double> rings;
  for (std::size_t j = 1; j <= radial; ++j) rings.push_back(r_max * static_cast<double>(j) / static_cast<double>(radial));
  rings.back() = r_max;
  for (double r : radii) {
    const bool present =
        std::any_of(rings.begin(), rings.end(), [r, r_max](double q) { return std::abs(q - r) <= 1e-12 * r_max; });
    if (!present) rings.push_back(r);
  }
  std::sort(rings.begin(), rings.end());
  // Snap rings that coincide with a requested radius onto it exactly.
  for (double& q : rings) {
    for (double r : radii) {
      if (std::abs(q - r) <= 1e-12 * r_max) q = r;
    }
  }

  std::vector<Scalar> nodes{Scalar(0.0, 0.0)};
  for (double q : rings) {
    for (std::size_t k = 0; k < angular; ++k) {
      const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(angular);
      nodes.push_back(k == 0 ? Scalar(q, 0.0) : std::polar(q, theta));
    }
  }
  const auto dim = static_cast<Index>(nodes.size());
  auto space = Space::make("polar-disc-" + std::to_string(radial) + "x" + std::to_string(angular), dim, Field::complex);

  Vector z(dim);
  for (Index j = 0; j < dim; ++j) z(j) = nodes[static_cast<std::size_t>(j)];
  const LinOp generator = LinOp::diagonal(z);
  auto propagate = [z](double s) { return LinOp::diagonal((s * z).array().exp().matrix()); };
  SemigroupEvaluator reference = SemigroupEvaluator::closed_form(generator, propagate, Stability{1.0, r_max});

  std::vector<Seminorm> members;
  for (double r : radii) {
    std::vector<Index> inside;
    for (Index j = 0; j < dim; ++j) {
      if (std::abs(z(j)) <= r * (1.0 + 1e-12)) inside.push_back(j);
    }
    members.push_back(SeminormFamily::sup_on(radius_label(r), std::move(inside)));
  }

  std::vector<StateVector> monomials;
  Vector power = Vector::Ones(dim);
  for (int k = 0; k < 8; ++k) {
    monomials.emplace_back(space, power);
    power = power.cwiseProduct(z);
  }

  std::vector<ChernoffFn> chernoff{semigroup_chernoff(reference), implicit_euler(generator)};
  return Scenario{.name = "mult-example",
                  .space = space,
                  .generator = generator,
                  .part_a = std::nullopt,
                  .part_b = std::nullopt,
                  .chernoff = std::move(chernoff),
                  .reference = std::move(reference),
                  .seminorms = SeminormFamily(dim, std::move(members)),
                  .initial = StateVector(space, Vector::Ones(dim)),
                  .t0 = 1.0,
                  .n_grid = geometric_n_grid(16, 1024),
                  .t_grid = default_t_grid(1.0),
                  .expected = {{"converge", "pass"},
                               {"unique", "pass"},
                               {"tk", "pass"},
                               {"diagnostics", "pass"},
                               {"exa-gap", "pass"}},
                  .density_basis = std::move(monomials),
                  .nodes = std::move(nodes),
                  .radii = std::move(radii)};
}

RangeGapReport resolvent_range_gap(const Scenario& scenario, Scalar lambda, const StateVector& f,
                                   const std::vector<StateVector>& candidates, double r) {
  if (scenario.nodes.empty()) throw InvalidArgument("range gap needs the multiplication example grid");
  if (std::abs(lambda) > r) throw InvalidArgument("range gap needs |lambda| <= r");
  if (candidates.empty()) throw InvalidArgument("range gap needs at least one candidate");
  require_dim("range gap f", scenario.dim(), f.dim());

  std::vector<Index> inside;
  Index nearest = -1;
  double best = INFINITY;
  for (std::size_t j = 0; j < scenario.nodes.size(); ++j) {
    const Scalar z = scenario.nodes[j];
    if (std::abs(z) > r * (1.0 + 1e-12)) continue;
    inside.push_back(static_cast<Index>(j));
    const double d = std::abs(z - lambda);
    if (d < best) {
      best = d;
      nearest = static_cast<Index>(j);
    }
  }

  RangeGapReport report;
  report.nearest_node = scenario.nodes[static_cast<std::size_t>(nearest)];
  report.node_distance = best;
  report.candidates = candidates.size();
  report.min_defect = INFINITY;
  double max_g_at_node = 0.0;
  for (const auto& g : candidates) {
    require_dim("range gap candidate", scenario.dim(), g.dim());
    double defect = 0.0;
    for (Index j : inside) {
      const Scalar z = scenario.nodes[static_cast<std::size_t>(j)];
      defect = std::max(defect, std::abs((lambda - z) * g.coords()(j) - f.coords()(j)));
    }
    report.min_defect = std::min(report.min_defect, defect);
    max_g_at_node = std::max(max_g_at_node, std::abs(g.coords()(nearest)));
  }
  report.eps_grid = best * max_g_at_node;
  report.lower_bound = std::abs(f.coords()(nearest)) - report.eps_grid;
  report.pass = report.min_defect >= report.lower_bound - 1e-12;
  return report;
}

std::vector<StateVector> random_polynomial_candidates(const Scenario& scenario, std::size_t count, std::size_t degree,
                                                      std::uint64_t seed) {
  if (scenario.nodes.empty()) throw InvalidArgument("polynomial candidates need the multiplication example grid");
  std::mt19937_64 rng(seed);
  std::vector<StateVector> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    const Vector coeffs = random_complex(rng, static_cast<Index>(degree + 1));
    Vector values(scenario.dim());
    for (std::size_t j = 0; j < scenario.nodes.size(); ++j) {
      Scalar acc{};
      for (Index k = coeffs.size() - 1; k >= 0; --k) acc = acc * scenario.nodes[j] + coeffs(k);
      values(static_cast<Index>(j)) = acc;
    }
    out.emplace_back(scenario.space, std::move(values));
  }
  return out;
}

}  // namespace ck
