#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chernoff_kit/chernoff.hpp"
#include "chernoff_kit/error.hpp"
#include "chernoff_kit/scenarios.hpp"
#include "chernoff_kit/seminorm.hpp"
#include "support.hpp"

using namespace ck;

namespace {

std::vector<SeminormFamily> axiom_families(Index n, std::mt19937_64& rng) {
  std::vector<Index> subset;
  for (Index i = 0; i < n; ++i) {
    if (rng() % 2 == 0) subset.push_back(i);
  }
  return {SeminormFamily(n, {SeminormFamily::l2(), SeminormFamily::sup(), SeminormFamily::l1(),
                             SeminormFamily::sup_on("sup_subset", subset)})};
}

// max over u in [0, s] (fine grid) and nodes |z| <= r of |e^{u z}|.
double fine_multiplication_sup(const Scenario& sc, double s, double r) {
  double best = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double u = s * k / 2000.0;
    for (const Scalar z : sc.nodes) {
      if (std::abs(z) <= r * (1 + 1e-12)) best = std::max(best, std::abs(std::exp(u * z)));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("state vectors carry their space and reject non-finite data") {
  auto space = Space::make("grid", 3);
  StateVector v(space, Vector::Ones(3));
  CHECK(v.dim() == 3);
  CHECK(v.space().id == "grid");
  CHECK(v.all_finite());
  CHECK_THROWS_AS(StateVector(space, Vector::Ones(2)), DimensionMismatch);
  Vector bad = Vector::Ones(3);
  bad(1) = Scalar(NAN, 0.0);
  CHECK_THROWS_AS(ensure_finite(bad, "test"), NonFiniteValue);
}

TEST_CASE("seminorm evaluation examples") {
  const auto fam = SeminormFamily::standard();
  CHECK(eval_seminorm(fam, 1, StateVector(Vector::Zero(4))) == 0.0);
  CHECK(eval_seminorm(fam, 0, StateVector{3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));

  const Scenario disc = build_multiplication_example({1.0}, 8, 16);
  const StateVector one(disc.space, Vector::Ones(disc.dim()));
  CHECK(eval_seminorm(disc.seminorms, 0, one) == 1.0);
}

TEST_CASE("seminorm evaluation errors") {
  const SeminormFamily fam(3, {SeminormFamily::l2()});
  CHECK_THROWS_AS(eval_seminorm(fam, 1, StateVector{1.0, 2.0, 3.0}), IndexOutOfRange);
  CHECK_THROWS_AS(eval_seminorm(fam, 0, StateVector{1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("seminorm axioms on 1000 random triples") {
  auto rng = ckt::rng_for(11);
  const Index n = 9;
  for (const auto& fam : axiom_families(n, rng)) {
    for (std::size_t a = 0; a < fam.size(); ++a) {
      CHECK(fam.evaluate(a, Vector::Zero(n)) == 0.0);
      for (int trial = 0; trial < 1000; ++trial) {
        const Scalar lambda = ckt::random_scalar(rng);
        const Vector x = ckt::random_vector(rng, n);
        const Vector y = ckt::random_vector(rng, n);
        const double px = fam.evaluate(a, x);
        const double py = fam.evaluate(a, y);
        const double scaled = fam.evaluate(a, lambda * x);
        CHECK(std::abs(scaled - std::abs(lambda) * px) <= 1e-12 * std::abs(lambda) * px);
        CHECK(fam.evaluate(a, x + y) <= (px + py) * (1 + 1e-12));
        CHECK(px >= 0.0);
      }
    }
  }
}

TEST_CASE("lattice points respect the horizon") {
  const auto lattice = LatticeSpec::geometric(1.3, 1e-3);
  CHECK(lattice.steps().front() == 1.3);
  for (std::size_t i = 0; i < lattice.steps().size(); ++i) {
    const double step = lattice.steps()[i];
    const std::size_t cap = lattice.power_caps()[i];
    CHECK(static_cast<double>(cap) * step <= 1.3);
    CHECK(static_cast<double>(cap + 1) * step > 1.3 * (1 - 1e-12));
    CHECK(lattice.cap(i, 0.5) * step <= 0.5);
  }
  // Roughly 20 steps per decade over three decades.
  CHECK(lattice.steps().size() >= 60);
  CHECK(lattice.steps().size() <= 63);
  CHECK_THROWS_AS(LatticeSpec(-1.0, {0.1}), InvalidArgument);
}

TEST_CASE("derived seminorm of the identity family is the seminorm") {
  auto rng = ckt::rng_for(3);
  const auto fam = SeminormFamily::standard();
  const auto lattice = LatticeSpec::geometric(2.0, 1e-2);
  const StateVector x(ckt::random_vector(rng, 5));
  const auto id = ChernoffFn::identity(5);
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(derived_seminorm(fam, a, id, 1.5, lattice, x) == eval_seminorm(fam, a, x));
  }
}

TEST_CASE("derived seminorm at s = 0 is exactly the seminorm") {
  auto rng = ckt::rng_for(4);
  const auto fam = SeminormFamily::standard();
  const auto lattice = LatticeSpec::geometric(1.0, 1e-2);
  const auto f = implicit_euler(LinOp::dense(ckt::random_dissipative(rng, 4)));
  const StateVector x(ckt::random_vector(rng, 4));
  for (std::size_t a = 0; a < 2; ++a) CHECK(derived_seminorm(fam, a, f, 0.0, lattice, x) == eval_seminorm(fam, a, x));
}

TEST_CASE("derived seminorm of the multiplication semigroup on the unit disc") {
  const Scenario sc = build_multiplication_example({1.0}, 16, 32);
  const StateVector one(sc.space, Vector::Ones(sc.dim()));
  const auto lattice = LatticeSpec::geometric(1.0, 1e-2);
  const double value = derived_seminorm(sc.seminorms, 0, sc.primary(), 1.0, lattice, one);
  CHECK(value == doctest::Approx(std::numbers::e).epsilon(1e-13));
  CHECK(value == doctest::Approx(fine_multiplication_sup(sc, 1.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("derived seminorm is monotone in s and under refinement") {
  auto rng = ckt::rng_for(5);
  const Matrix m = ckt::random_matrix(rng, 4) * 0.7;
  const SemigroupEvaluator sg(LinOp::dense(m), SemigroupMethod::dense_expm);
  const auto f = semigroup_chernoff(sg);
  const auto fam = SeminormFamily::standard();
  const auto lattice = LatticeSpec::geometric(1.0, 0.05, 5);
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector x(ckt::random_vector(rng, 4));
    double previous = 0.0;
    for (double s : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
      const double v = derived_seminorm(fam, 0, f, s, lattice, x);
      CHECK(v >= previous);
      previous = v;
      CHECK(derived_seminorm(fam, 0, f, s, lattice.refined(), x) >= v);
    }
  }
}

TEST_CASE("derived seminorm obeys the stability bound of a contraction") {
  auto rng = ckt::rng_for(6);
  const auto fam = SeminormFamily::standard();
  const auto lattice = LatticeSpec::geometric(1.0, 1e-2, 10);
  const auto f = implicit_euler(LinOp::dense(ckt::random_dissipative(rng, 6)));
  REQUIRE(f.stability().has_value());
  const Stability st = *f.stability();
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector x(ckt::random_vector(rng, 6));
    const double bound = st.M * std::exp(st.a * 1.0) * eval_seminorm(fam, 0, x);
    CHECK(derived_seminorm(fam, 0, f, 1.0, lattice, x) <= bound * (1 + 1e-12));
  }
}

TEST_CASE("iterated derived seminorm") {
  auto rng = ckt::rng_for(7);
  const auto fam = SeminormFamily::standard();
  const auto lattice = LatticeSpec::geometric(1.0, 1e-2, 10);
  const StateVector x(ckt::random_vector(rng, 3));
  const auto f = implicit_euler(LinOp::dense(ckt::random_matrix(rng, 3) * 0.3));

  SUBCASE("a single spec equals the derived seminorm") {
    CHECK(iterated_derived_seminorm(fam, 0, {{f, 0.6}}, lattice, x) == derived_seminorm(fam, 0, f, 0.6, lattice, x));
  }
  SUBCASE("two identity specs give the seminorm") {
    const auto id = ChernoffFn::identity(3);
    CHECK(iterated_derived_seminorm(fam, 1, {{id, 0.5}, {id, 0.7}}, lattice, x) == eval_seminorm(fam, 1, x));
  }
  SUBCASE("two half-time multiplication semigroups reach total time one") {
    const Scenario sc = build_multiplication_example({1.0}, 16, 32);
    const StateVector one(sc.space, Vector::Ones(sc.dim()));
    const auto half = LatticeSpec::geometric(0.5, 1e-2, 5);
    const double value = iterated_derived_seminorm(sc.seminorms, 0, {{sc.primary(), 0.5}, {sc.primary(), 0.5}}, half, one);
    CHECK(value == doctest::Approx(std::numbers::e).epsilon(1e-13));
    CHECK(value == doctest::Approx(fine_multiplication_sup(sc, 1.0, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("derived seminorm: serial and parallel sweeps agree exactly") {
  auto rng = ckt::rng_for(8);
  const auto fam = SeminormFamily::standard();
  const auto lattice = LatticeSpec::geometric(1.0, 1e-3);
  const auto f = implicit_euler(LinOp::dense(ckt::random_dissipative(rng, 8)));
  const StateVector x(ckt::random_vector(rng, 8));
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(derived_seminorm(fam, a, f, 0.8, lattice, x, Exec::serial) ==
          derived_seminorm(fam, a, f, 0.8, lattice, x, Exec::parallel));
  }
}
