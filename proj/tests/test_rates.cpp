#include <doctest.h>

#include <cmath>
#include <vector>

#include "chernoff_kit/error.hpp"
#include "chernoff_kit/rates.hpp"
#include "support.hpp"

using namespace ck;

namespace {

std::vector<std::size_t> doubling(std::size_t from, std::size_t count) {
  std::vector<std::size_t> ns;
  for (std::size_t i = 0; i < count; ++i) ns.push_back(from << i);
  return ns;
}

std::vector<double> power_law(const std::vector<std::size_t>& ns, double c, double p) {
  std::vector<double> out;
  for (auto n : ns) out.push_back(c * std::pow(static_cast<double>(n), -p));
  return out;
}

}  // namespace

TEST_CASE("exact power laws recover their order") {
  const auto ns = doubling(16, 7);
  for (double p : {1.0, 2.0}) {
    const auto fit = fit_rate(power_law(ns, 3.0, p), ns);
    CHECK(fit.flag == RateFlag::ok);
    CHECK(std::abs(fit.slope - p) <= 1e-12);
    CHECK(fit.residual <= 1e-12);
    CHECK(fit.points == kRateTailPoints);
  }
}

TEST_CASE("degenerate curves are flagged") {
  const auto ns = doubling(16, 6);
  CHECK(fit_rate(std::vector<double>(6, 0.5), ns).flag == RateFlag::flat);
  CHECK(fit_rate(power_law(ns, 1e-14, 1.0), ns).flag == RateFlag::floor);
  const std::vector<std::size_t> three = {16, 32, 64};
  CHECK(fit_rate(std::vector<double>{1.0, 0.5, 0.25}, three).flag == RateFlag::insufficient);
  CHECK(fit_rate(std::vector<double>{1.0, 0.1, 1.0, 0.01, 1.0, 1e-3}, ns).flag == RateFlag::noisy);
}

TEST_CASE("invalid inputs") {
  const std::vector<std::size_t> ns = {16, 32, 32, 64};
  CHECK_THROWS_AS(fit_rate(std::vector<double>{1, 1, 1, 1}, ns), InvalidArgument);
  CHECK_THROWS_AS(fit_rate(std::vector<double>{1, 1}, std::vector<std::size_t>{1}), InvalidArgument);
}

TEST_CASE("random power laws with mild noise stay inside the confidence interval") {
  auto rng = ckt::rng_for(61);
  std::uniform_real_distribution<double> order(0.5, 3.0), noise(-0.02, 0.02), scale(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = order(rng);
    const auto ns = doubling(8, 8);
    auto errors = power_law(ns, scale(rng), p);
    for (auto& e : errors) e *= std::exp(noise(rng));
    const auto fit = fit_rate(errors, ns);
    CHECK(fit.flag == RateFlag::ok);
    CHECK(std::abs(fit.slope - p) < 0.1);
    CHECK(fit.ci_low <= fit.slope);
    CHECK(fit.ci_high >= fit.slope);
  }
}

TEST_CASE("scaling the errors leaves the slope unchanged") {
  auto rng = ckt::rng_for(62);
  std::uniform_real_distribution<double> val(0.1, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ns = doubling(16, 5);
    std::vector<double> errors;
    double e = 1.0;
    for (std::size_t i = 0; i < ns.size(); ++i) errors.push_back(e *= val(rng));
    auto scaled = errors;
    for (auto& x : scaled) x *= 7.5;
    const auto a = fit_rate(errors, ns);
    const auto b = fit_rate(scaled, ns);
    CHECK(a.slope == doctest::Approx(b.slope).epsilon(1e-10));
  }
}
