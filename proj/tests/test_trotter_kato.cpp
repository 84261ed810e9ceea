#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chernoff_kit/error.hpp"
#include "chernoff_kit/trotter_kato.hpp"
#include "support.hpp"

using namespace ck;

namespace {

Matrix swap2() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

LinOp diag2(double a, double b) {
  Vector d(2);
  d << a, b;
  return LinOp::diagonal(d);
}

std::vector<double> uniform_l(double t0, int count) {
  std::vector<double> l;
  for (int i = 0; i <= count; ++i) l.push_back(t0 * i / count);
  return l;
}

std::vector<CoreWitness> constant_witnesses(const std::vector<StateVector>& basis) {
  std::vector<CoreWitness> out;
  for (const auto& b : basis) out.push_back({b, [b](double) { return b; }});
  return out;
}

/// Z_0 + sW with a random dissipative Z_0 and a random W of unit spectral norm.
struct RandomFamily {
  LinOp z0;
  LinOp w;
  GeneratorFamily family;
};

RandomFamily random_family(std::uint64_t seed, Index n) {
  auto rng = ckt::rng_for(seed);
  const Matrix z0 = ckt::random_dissipative(rng, n) * 2.0;
  Matrix w = ckt::random_matrix(rng, n);
  w /= w.operatorNorm();
  RandomFamily out{LinOp::dense(z0), LinOp::dense(w), {}};
  out.family = GeneratorFamily::linear(out.z0, out.w, GeneratorFamily::default_s_grid());
  return out;
}

}  // namespace

TEST_CASE("linear families") {
  const auto fam = GeneratorFamily::linear(diag2(-1, -2), LinOp::dense(swap2()), {0.5, 0.25});
  CHECK(fam.dim() == 2);
  const Matrix z = fam.at(0.5).to_dense();
  CHECK(z(0, 1) == Scalar(0.5));
  CHECK(z(1, 1) == Scalar(-2.0));
  CHECK(fam.at(0.0).to_dense() == diag2(-1, -2).to_dense());

  const auto grid = GeneratorFamily::default_s_grid();
  REQUIRE(grid.size() == 10);
  CHECK(grid.front() == 0.5);
  CHECK(grid.back() == std::ldexp(1.0, -10));

  const auto structured = GeneratorFamily::linear(diag2(-1, -2), diag2(1, 0), {0.5});
  CHECK(structured.at(0.5).kind() == OpKind::diagonal);
}

TEST_CASE("equicontinuity examples") {
  SUBCASE("contraction family") {
    const GeneratorFamily fam{[](double) { return LinOp::dense(-Matrix::Identity(3, 3)); }, {0.5, 0.25, 0.125}, "minus-I"};
    const auto r = family_equicontinuity(fam, 1.0, 8);
    CHECK(r.pass);
    CHECK(r.fit.M == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(r.fit.a) <= 1e-8);
  }
  SUBCASE("bounded perturbation of diag(-1, -2)") {
    std::vector<double> s_grid;
    for (double s = 0.5; s > 1e-3; s /= 2) s_grid.push_back(s);
    const auto fam = GeneratorFamily::linear(diag2(-1, -2), LinOp::dense(swap2()), s_grid);
    const auto r = family_equicontinuity(fam, 1.0, 16);
    CHECK(r.pass);
    CHECK(std::isfinite(r.bound));
    CHECK(r.fit.M <= std::exp(0.5));
    // Oracle: every sampled exponential, via Eigen's expm, under the fitted envelope.
    for (double s : s_grid) {
      for (int k = 1; k <= 16; ++k) {
        const double l = k / 16.0;
        const double norm = ckt::eigen_expm(l * fam.at(s).to_dense()).operatorNorm();
        CHECK(norm <= r.fit.M * std::exp(r.fit.a * l) * (1 + 1e-10));
      }
    }
  }
  SUBCASE("unbounded family fails") {
    const GeneratorFamily fam{[](double s) { return LinOp::diagonal(Vector::Constant(2, s)); }, {1e4, 1e3, 1e2, 10.0},
                              "sI"};
    CHECK_FALSE(family_equicontinuity(fam, 1.0, 8).pass);
  }
}

TEST_CASE("core condition examples") {
  const auto basis = standard_basis(3);
  auto rng = ckt::rng_for(71);
  const auto fam = GeneratorFamily::linear(LinOp::dense(ckt::random_dissipative(rng, 3)),
                                           LinOp::dense(ckt::random_matrix(rng, 3)), GeneratorFamily::default_s_grid());
  const auto seminorms = SeminormFamily::standard();

  const auto full = core_condition_check(fam, constant_witnesses(basis), basis, seminorms);
  CHECK(full.pass);
  CHECK(full.witness_rank == 3);

  const auto partial = core_condition_check(fam, constant_witnesses({basis[0], basis[1]}), basis, seminorms);
  CHECK_FALSE(partial.pass);
  CHECK_FALSE(partial.spans);
  CHECK(partial.witness_rank == 2);
  CHECK(partial.combined_rank == 3);

  auto divergent = constant_witnesses(basis);
  const StateVector f = basis[2];
  divergent[2].family = [f](double s) { return f.with_coords((1.0 + 1.0 / s) * f.coords()); };
  const auto bad = core_condition_check(fam, divergent, basis, seminorms);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.witness_converges[2]);
  CHECK(bad.witness_converges[0]);

  CHECK_THROWS_AS(core_condition_check(fam, {}, basis, seminorms), InvalidArgument);
}

TEST_CASE("convergence sweep examples") {
  const auto seminorms = SeminormFamily::standard();
  const StateVector f{1.0, 1.0};
  const auto l_grid = uniform_l(1.0, 20);

  const GeneratorFamily fixed{[](double) { return diag2(-1, -2); }, GeneratorFamily::default_s_grid(), "fixed"};
  const auto same = semigroup_convergence_sweep(fixed, f, 1.0, l_grid, seminorms);
  CHECK(same.pass);
  for (const auto& curve : same.sup_error) {
    for (double v : curve) CHECK(v == 0.0);
  }

  const auto fam = GeneratorFamily::linear(diag2(-1, -2), LinOp::dense(swap2()), GeneratorFamily::default_s_grid());
  const auto duhamel = semigroup_convergence_sweep(fam, f, 1.0, l_grid, seminorms);
  CHECK(duhamel.pass);
  for (std::size_t i = 0; i < fam.s_grid.size(); ++i) {
    const double s = fam.s_grid[i];
    // Oracle: Eigen's expm on the same l grid.
    double oracle = 0.0;
    for (double l : l_grid) {
      const Vector diff = ckt::eigen_expm(l * fam.at(s).to_dense()) * f.coords() - ckt::eigen_expm(l * fam.at(0).to_dense()) * f.coords();
      oracle = std::max(oracle, diff.norm());
    }
    CHECK(duhamel.sup_error[0][i] == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(duhamel.sup_error[0][i] <= std::numbers::e * 1.0 * 1.0 * s);
    if (i > 0) {
      const double ratio = duhamel.sup_error[0][i - 1] / duhamel.sup_error[0][i];
      CHECK(ratio >= 1.6);
      CHECK(ratio <= 2.4);
    }
  }

  const GeneratorFamily stuck{[](double s) { return s == 0.0 ? diag2(-1, -2) : LinOp::dense(diag2(-1, -2).to_dense() + swap2()); },
                              GeneratorFamily::default_s_grid(), "stuck"};
  CHECK_FALSE(semigroup_convergence_sweep(stuck, f, 1.0, l_grid, seminorms).pass);

  CHECK_THROWS_AS(semigroup_convergence_sweep(fam, f, 1.0, {0.0, 1.5}, seminorms), InvalidArgument);
}

TEST_CASE("core elements from integrals") {
  auto rng = ckt::rng_for(72);
  const StateVector x(ckt::random_vector(rng, 3));
  const SemigroupEvaluator zero(LinOp::zero(3), SemigroupMethod::dense_expm);
  const auto flat = core_elements_from_integrals(zero, x, 0.25, 1.0, 8);
  CHECK((flat.integral.coords() - 0.75 * x.coords()).norm() <= 1e-15 * x.coords().norm());
  CHECK(flat.defect == 0.0);

  const SemigroupEvaluator decay(LinOp::diagonal(Vector::Constant(1, -1.0)), SemigroupMethod::spectral);
  const auto e64 = core_elements_from_integrals(decay, StateVector{1.0}, 0.0, 1.0, 64);
  CHECK(e64.integral.coords()(0).real() == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-4));
  CHECK(e64.integral.coords()(0).real() == doctest::Approx(0.6321206).epsilon(1e-4));
  // Closed-form trapezoid error for the scalar case: h/2 coth(h/2) (1 - e^{-1}) - (1 - e^{-1}).
  for (std::size_t n : {4, 8, 16, 32, 64}) {
    const double h = 1.0 / static_cast<double>(n);
    const double oracle = (h / 2.0 / std::tanh(h / 2.0) - 1.0) * (1.0 - std::exp(-1.0));
    const auto el = core_elements_from_integrals(decay, StateVector{1.0}, 0.0, 1.0, n);
    CHECK(el.defect == doctest::Approx(oracle).epsilon(1e-8));
    const auto twice = core_elements_from_integrals(decay, StateVector{1.0}, 0.0, 1.0, 2 * n);
    CHECK(el.defect / twice.defect == doctest::Approx(4.0).epsilon(0.02));
  }
  CHECK_THROWS_AS(core_elements_from_integrals(decay, StateVector{1.0}, 1.0, 0.5, 8), InvalidArgument);
  CHECK_THROWS_AS(core_elements_from_integrals(decay, StateVector{1.0}, 0.0, 1.0, 1), InvalidArgument);
}

TEST_CASE("integral witnesses reproduce the basis in preimage mode") {
  const auto fam = GeneratorFamily::linear(diag2(-1, -2), LinOp::dense(swap2()), GeneratorFamily::default_s_grid());
  const std::vector<StateVector> one = {StateVector{1.0, 0.0}};
  const auto w = integral_witnesses(fam, one, 0.1, 16, WitnessSource::preimage);
  CHECK((w[0].f.coords() - one[0].coords()).norm() <= 1e-12);
  const auto plain = integral_witnesses(fam, one, 0.1, 16);
  const double q = 0.1 / 16 * (0.5 + 0.5 * std::exp(-0.1));
  double sum = q;
  for (int k = 1; k < 16; ++k) sum += 0.1 / 16 * std::exp(-0.1 * k / 16);
  CHECK(plain[0].f.coords()(0).real() == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("core and equicontinuity imply convergence on every basis vector") {
  const auto seminorms = SeminormFamily::standard();
  const auto l_grid = uniform_l(1.0, 10);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rf = random_family(400 + seed, 4);
    const auto basis = standard_basis(4);
    const bool core = core_condition_check(rf.family, constant_witnesses(basis), basis, seminorms).pass;
    const bool equi = family_equicontinuity(rf.family, 1.0, 8).pass;
    if (!(core && equi)) continue;
    ++checked;
    for (const auto& b : basis) CHECK(semigroup_convergence_sweep(rf.family, b, 1.0, l_grid, seminorms).pass);
  }
  CHECK(checked == 20);
}

TEST_CASE("convergence on a basis implies the integral witnesses form a core") {
  const auto seminorms = SeminormFamily::standard();
  const auto l_grid = uniform_l(1.0, 10);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rf = random_family(500 + seed, 4);
    const auto basis = standard_basis(4);
    bool all = true;
    for (const auto& b : basis) all = all && semigroup_convergence_sweep(rf.family, b, 1.0, l_grid, seminorms).pass;
    if (!all) continue;
    ++checked;
    const auto witnesses = integral_witnesses(rf.family, basis, 0.1, 16);
    CHECK(core_condition_check(rf.family, witnesses, basis, seminorms).pass);
  }
  CHECK(checked == 20);
}

TEST_CASE("sweep error obeys the perturbation bound") {
  const auto seminorms = SeminormFamily::standard();
  const double t0 = 1.0;
  const auto l_grid = uniform_l(t0, 16);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rf = random_family(600 + seed, 5);
    const auto equi = family_equicontinuity(rf.family, t0, 32);
    REQUIRE(equi.pass);
    const double w_norm = operator_norm(rf.w);
    auto rng = ckt::rng_for(700 + seed);
    const StateVector f(ckt::random_unit(rng, 5));
    const auto sweep = semigroup_convergence_sweep(rf.family, f, t0, l_grid, seminorms);
    for (std::size_t i = 0; i < rf.family.s_grid.size(); ++i) {
      const double s = rf.family.s_grid[i];
      const double bound = s * t0 * w_norm * equi.fit.M * equi.fit.M * std::exp(equi.fit.a * t0);
      for (const auto& curve : sweep.sup_error) CHECK(curve[i] <= bound * (1 + 1e-10));
    }
  }
}

TEST_CASE("operator norms and propagators") {
  auto rng = ckt::rng_for(73);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = ckt::random_matrix(rng, 5);
    CHECK(operator_norm(LinOp::dense(m)) == doctest::Approx(m.operatorNorm()).epsilon(1e-10));
    const Matrix p = propagator(LinOp::dense(m * 0.3), 0.7).to_dense();
    CHECK(ckt::rel_diff(p, ckt::eigen_expm(m * 0.21)) <= 1e-12);
  }
  CHECK(operator_norm(diag2(-3, 2)) == 3.0);
  CHECK_THROWS_AS(propagator(LinOp::diagonal(Vector::Constant(1, 1e4)), 1.0), NonFiniteValue);
}

TEST_CASE("trotter-kato kernels: serial and parallel agree exactly") {
  const auto seminorms = SeminormFamily::standard();
  const auto rf = random_family(800, 6);
  auto rng = ckt::rng_for(801);
  const StateVector f(ckt::random_vector(rng, 6));
  const auto l_grid = uniform_l(1.0, 8);
  const auto a = semigroup_convergence_sweep(rf.family, f, 1.0, l_grid, seminorms, Exec::serial);
  const auto b = semigroup_convergence_sweep(rf.family, f, 1.0, l_grid, seminorms, Exec::parallel);
  CHECK(a.sup_error == b.sup_error);
  const auto ea = family_equicontinuity(rf.family, 1.0, 8, kEquicontinuityBoundCap, Exec::serial);
  const auto eb = family_equicontinuity(rf.family, 1.0, 8, kEquicontinuityBoundCap, Exec::parallel);
  CHECK(ea.fit.M == eb.fit.M);
  CHECK(ea.fit.a == eb.fit.a);
}
