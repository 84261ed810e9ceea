#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chernoff_kit/chernoff.hpp"
#include "chernoff_kit/convergence.hpp"
#include "chernoff_kit/error.hpp"
#include "chernoff_kit/scenarios.hpp"
#include "support.hpp"

using namespace ck;

namespace {

Eigen::VectorXd one_plus_cos(Index n) {
  Eigen::VectorXd v(n);
  for (Index j = 0; j < n; ++j) v(j) = 1.0 + std::cos(2.0 * std::numbers::pi * j / n);
  return v;
}

Eigen::VectorXd barrier(Index n, double height, double width) {
  Eigen::VectorXd v(n);
  for (Index j = 0; j < n; ++j) {
    const double x = 2.0 * std::numbers::pi * j / n;
    v(j) = std::abs(x - std::numbers::pi) < width ? height : 0.0;
  }
  return v;
}

const std::vector<std::size_t> kNGrid = {16, 32, 64, 128, 256, 512, 1024};

double max_errors(const Scenario& sc, const ChernoffFn& f, const std::vector<std::size_t>& n_grid) {
  return chernoff_converge(f, sc.reference, sc.initial, sc.t0, n_grid, sc.t_grid, sc.seminorms).max_error();
}

}  // namespace

TEST_CASE("heat splitting is exact when the factors commute") {
  const Scenario zero = build_heat_potential(64, Eigen::VectorXd::Zero(64));
  CHECK(max_errors(zero, zero.primary(), kNGrid) <= 1e-10);
  const Scenario shift = build_heat_potential(64, Eigen::VectorXd::Constant(64, 0.7));
  CHECK(max_errors(shift, shift.primary(), kNGrid) <= 1e-10);
  CHECK_THROWS_AS(build_heat_potential(48, Eigen::VectorXd::Zero(48)), InvalidArgument);
}

TEST_CASE("heat with 1 + cos potential converges at first order") {
  const Scenario sc = build_heat_potential(128, one_plus_cos(128));
  const auto report = chernoff_converge(sc.primary(), sc.reference, sc.initial, sc.t0, kNGrid, sc.t_grid, sc.seminorms);
  for (const auto& fit : report.fitted_rate) {
    CHECK(fit.slope >= 0.8);
    CHECK(fit.slope <= 1.2);
  }
  // The library reference matches an independent exponential of the same discretization.
  const Matrix z = sc.generator.to_dense();
  const Vector oracle = ckt::eigen_expm(z) * sc.initial.coords();
  CHECK((sc.reference.apply(1.0, sc.initial).coords() - oracle).norm() <= 1e-10);
}

TEST_CASE("heat positivity for nonnegative data") {
  const Scenario sc = build_heat_potential(64, one_plus_cos(64));
  const StateVector h = sc.initial.with_coords(sc.initial.coords().real().cast<Scalar>());
  REQUIRE(h.coords().real().minCoeff() >= 0.0);
  CHECK(sc.reference.apply(1.0, h).coords().real().minCoeff() >= -1e-10);
  for (std::size_t n : {4, 16, 64, 256}) {
    CHECK(product_apply(sc.chernoff[1], 1.0, n, h).value.coords().real().minCoeff() >= -1e-10);
    // Lie splitting: reported, not asserted.
    const double lie_min = product_apply(sc.chernoff[0], 1.0, n, h).value.coords().real().minCoeff();
    MESSAGE("Lie splitting minimum at n=" << n << ": " << lie_min);
  }
}

TEST_CASE("Schrodinger splitting conserves the l2 norm") {
  auto rng = ckt::rng_for(81);
  const Scenario sc = build_schrodinger(64, barrier(64, 5.0, 0.5));
  const StateVector h(sc.space, ckt::random_unit(rng, 64));
  for (double step : {1e-4, 1e-2, 0.3}) {
    const StepOp op = sc.primary().at(step);
    Vector y = h.coords();
    for (int k = 0; k < 100; ++k) {
      const Vector next = op(y);
      CHECK(std::abs(next.norm() - y.norm()) <= 1e-12);
      y = next;
    }
  }
  for (std::size_t n : {1, 7, 100}) {
    CHECK(std::abs(product_apply(sc.primary(), 0.5, n, h).value.coords().norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("free Schrodinger propagation is exact") {
  const Scenario sc = build_schrodinger(64, Eigen::VectorXd::Zero(64));
  const Vector symbol = laplacian_symbol(64);
  const Vector h = sc.initial.coords();
  // Oracle: plane-wave decomposition by explicit DFT sums.
  const double t = 0.5;
  Vector oracle = Vector::Zero(64);
  for (Index k = 0; k < 64; ++k) {
    Scalar coeff = 0.0;
    for (Index j = 0; j < 64; ++j) coeff += h(j) * std::polar(1.0, -2.0 * std::numbers::pi * k * j / 64);
    coeff *= std::exp(Scalar(0.0, 1.0) * symbol(k) * t) / 64.0;
    for (Index j = 0; j < 64; ++j) oracle(j) += coeff * std::polar(1.0, 2.0 * std::numbers::pi * k * j / 64);
  }
  for (std::size_t n : {1, 16, 256}) {
    CHECK((product_apply(sc.primary(), t, n, sc.initial).value.coords() - oracle).norm() <= 1e-10);
  }
}

TEST_CASE("Schrodinger with a barrier converges at first order") {
  const Scenario sc = build_schrodinger(64, barrier(64, 5.0, 0.5));
  const auto report = chernoff_converge(sc.primary(), sc.reference, sc.initial, sc.t0, sc.n_grid, sc.t_grid, sc.seminorms);
  for (const auto& fit : report.fitted_rate) {
    CHECK(fit.slope >= 0.8);
    CHECK(fit.slope <= 1.2);
  }
}

TEST_CASE("dissipative scenario examples") {
  SUBCASE("skew generator") {
    DissipativeOptions opts;
    opts.damping_scale = 0.0;
    const Scenario sc = build_dissipative_random(8, 3, opts);
    for (double t : {0.1, 1.0, 5.0}) {
      CHECK(std::abs(sc.reference.apply(t, sc.initial).coords().norm() - 1.0) <= 1e-12);
      CHECK(sc.primary().eval(t, sc.initial).coords().norm() <= 1.0 + 1e-14);
    }
  }
  SUBCASE("dim 50, seed 7") {
    const Scenario sc = build_dissipative_random(50, 7);
    const Matrix z = sc.generator.to_dense();
    Eigen::SelfAdjointEigenSolver<Matrix> eig((z + z.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().maxCoeff() <= 1e-12);
    CHECK(is_dissipative(sc.generator, 20, 1e-12).dissipative);
    const auto report = chernoff_converge(sc.primary(), sc.reference, sc.initial, sc.t0, kNGrid, sc.t_grid, sc.seminorms);
    for (const auto& fit : report.fitted_rate) {
      CHECK(fit.slope >= 0.8);
      CHECK(fit.slope <= 1.2);
    }
  }
  SUBCASE("pure identity damping decays like the scalar case") {
    DissipativeOptions opts;
    opts.skew_scale = 0.0;
    opts.identity_damping = true;
    const Scenario sc = build_dissipative_random(6, 1, opts);
    const auto report = chernoff_converge(sc.primary(), sc.reference, sc.initial, 1.0, kNGrid, {0.5, 1.0}, sc.seminorms);
    for (std::size_t ti = 0; ti < 2; ++ti) {
      const double t = ti == 0 ? 0.5 : 1.0;
      for (std::size_t i = 0; i < kNGrid.size(); ++i) {
        const double n = static_cast<double>(kNGrid[i]);
        const double per_mode = std::abs(std::pow(1 + t / n, -n) - std::exp(-t));
        CHECK(report.error(0, ti, i) == doctest::Approx(per_mode * sc.initial.coords().norm()).epsilon(1e-8));
      }
    }
  }
  CHECK_THROWS_AS(build_dissipative_random(1, 0), InvalidArgument);
}

TEST_CASE("multiplication example") {
  const Scenario sc = build_multiplication_example({0.5, 1.0}, 64, 128);
  const StateVector one(sc.space, Vector::Ones(sc.dim()));
  const auto& r1 = sc.seminorms;
  // sup over |z| <= 1 of |e^z| by grid maximization.
  double oracle = 0.0;
  for (Scalar z : sc.nodes) {
    if (std::abs(z) <= 1.0 + 1e-12) oracle = std::max(oracle, std::abs(std::exp(z)));
  }
  CHECK(eval_seminorm(r1, 1, sc.reference.apply(1.0, one)) == doctest::Approx(oracle).epsilon(1e-15));
  CHECK(oracle == doctest::Approx(std::numbers::e).epsilon(1e-15));

  auto rng = ckt::rng_for(82);
  const StateVector f(sc.space, ckt::random_vector(rng, sc.dim()));
  CHECK(sc.reference.apply(0.0, f).coords() == f.coords());
  for (int trial = 0; trial < 10; ++trial) {
    const double l = 0.1 * (trial + 1), m = 0.37;
    const Vector joint = sc.reference.apply(l + m, f).coords();
    const Vector split = sc.reference.apply(l, sc.reference.apply(m, f)).coords();
    for (std::size_t a = 0; a < r1.size(); ++a) CHECK(r1.evaluate(a, joint - split) <= 1e-15 * r1.evaluate(a, joint));
  }
  CHECK_THROWS_AS(build_multiplication_example({1.0, 0.5}), InvalidArgument);
}

TEST_CASE("multiplication semigroup bound per radius") {
  const Scenario sc = build_multiplication_example({0.5, 1.0}, 32, 64);
  auto candidates = random_polynomial_candidates(sc, 20, 6, 5);
  candidates.emplace_back(sc.space, Vector::Ones(sc.dim()));
  for (const auto& f : candidates) {
    for (std::size_t a = 0; a < sc.radii.size(); ++a) {
      const double r = sc.radii[a];
      for (double s : {0.0, 0.25, 0.5, 1.0, 2.0}) {
        const double lhs = eval_seminorm(sc.seminorms, a, sc.reference.apply(s, f));
        CHECK(lhs <= std::exp(s * r) * eval_seminorm(sc.seminorms, a, f) * (1 + 1e-12));
      }
    }
  }
  const StateVector one(sc.space, Vector::Ones(sc.dim()));
  CHECK(eval_seminorm(sc.seminorms, 1, sc.reference.apply(1.5, one)) == doctest::Approx(std::exp(1.5)).epsilon(1e-10));
}

TEST_CASE("range gap examples") {
  const Scenario sc = build_multiplication_example({1.0}, 64, 128);
  const StateVector one(sc.space, Vector::Ones(sc.dim()));

  SUBCASE("lambda = 0") {
    const auto gap = resolvent_range_gap(sc, 0.0, one, random_polynomial_candidates(sc, 30, 6, 1), 1.0);
    CHECK(gap.pass);
    CHECK(gap.eps_grid == 0.0);
    CHECK(gap.min_defect >= 1.0 - gap.eps_grid);
  }
  SUBCASE("f vanishing at lambda has a near-zero defect") {
    const Scalar lambda(0.3, 0.0);
    Vector fz(sc.dim()), g(sc.dim());
    for (Index j = 0; j < sc.dim(); ++j) {
      fz(j) = sc.nodes[j] - lambda;
      g(j) = fz(j) / (lambda - sc.nodes[j]);
      if (std::abs(lambda - sc.nodes[j]) < 1e-14) g(j) = -1.0;
    }
    const auto gap = resolvent_range_gap(sc, lambda, StateVector(sc.space, fz), {StateVector(sc.space, g)}, 1.0);
    CHECK(gap.min_defect <= 1e-14);
  }
  SUBCASE("lambda = 0.5 with 100 candidates and a refinement study") {
    const auto gap = resolvent_range_gap(sc, 0.5, one, random_polynomial_candidates(sc, 100, 6, 2), 1.0);
    CHECK(gap.pass);
    CHECK(gap.min_defect >= 1.0 - gap.eps_grid);
    // Off-node lambda: slack shrinks with the grid and the bound holds on every refinement.
    const Scalar off(0.51, 0.013);
    double previous = INFINITY;
    for (std::size_t k : {16, 32, 64, 128}) {
      const Scenario fine = build_multiplication_example({1.0}, k, 2 * k);
      const StateVector ones(fine.space, Vector::Ones(fine.dim()));
      const auto r = resolvent_range_gap(fine, off, ones, random_polynomial_candidates(fine, 100, 6, 3), 1.0);
      CHECK(r.min_defect >= 1.0 - r.eps_grid);
      CHECK(r.node_distance <= 2.0 * std::numbers::pi / (2.0 * k) + 1.0 / k);
      CHECK(r.node_distance <= previous);
      previous = r.node_distance;
    }
  }
  CHECK_THROWS_AS(resolvent_range_gap(sc, 2.0, one, {one}, 1.0), InvalidArgument);
}

TEST_CASE("every built-in scenario validates") {
  CHECK_NOTHROW(build_heat_potential(128, one_plus_cos(128)).validate());
  CHECK_NOTHROW(build_schrodinger(64, barrier(64, 5.0, 0.5)).validate());
  CHECK_NOTHROW(build_dissipative_random(50, 7).validate());
  CHECK_NOTHROW(build_multiplication_example({0.5, 1.0}).validate());
  CHECK(builtin_scenarios().size() == 4);
}
