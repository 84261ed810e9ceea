#include "chernoff_kit/rates.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "chernoff_kit/error.hpp"

namespace ck {

const char* to_string(RateFlag flag) {
  switch (flag) {
    case RateFlag::ok: return "ok";
    case RateFlag::flat: return "flat";
    case RateFlag::floor: return "floor";
    case RateFlag::noisy: return "noisy";
    case RateFlag::insufficient: return "insufficient";
  }
  return "unknown";
}

namespace {

// Two-sided 97.5% quantiles of Student's t for 1..10 degrees of freedom.
double student_t975(std::size_t dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
  if (dof == 0) return INFINITY;
  return dof <= 10 ? table[dof - 1] : 1.96;
}

}  // namespace

RateFit fit_rate(std::span<const double> errors, std::span<const std::size_t> ns, double floor) {
  if (errors.size() != ns.size()) throw InvalidArgument("fit_rate: errors and ns differ in length");
  RateFit fit;
  if (errors.size() < kRateTailPoints) {
    fit.flag = RateFlag::insufficient;
    fit.points = errors.size();
    return fit;
  }
  const std::size_t first = errors.size() - kRateTailPoints;
  std::vector<double> x, y;
  for (std::size_t i = first; i < errors.size(); ++i) {
    if (ns[i] == 0) throw InvalidArgument("fit_rate: n must be positive");
    if (i > first && ns[i] <= ns[i - 1]) throw InvalidArgument("fit_rate: ns must be increasing");
    if (!(errors[i] > floor)) {
      fit.flag = RateFlag::floor;
      fit.points = kRateTailPoints;
      fit.slope = NAN;
      fit.residual = NAN;
      fit.ci_low = NAN;
      fit.ci_high = NAN;
      return fit;
    }
    x.push_back(-std::log(static_cast<double>(ns[i])));
    y.push_back(std::log(errors[i]));
  }
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.points = x.size();
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double ssr = 0.0;
  fit.residual = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + fit.slope * x[i]);
    ssr += r * r;
    fit.residual = std::max(fit.residual, std::abs(r));
  }
  const double se = std::sqrt(ssr / (k - 2.0) / sxx);
  const double half = student_t975(x.size() - 2) * se;
  fit.ci_low = fit.slope - half;
  fit.ci_high = fit.slope + half;
  if (fit.residual > kNoisyResidual) {
    fit.flag = RateFlag::noisy;
  } else if (std::abs(fit.slope) < kFlatSlope) {
    fit.flag = RateFlag::flat;
  } else {
    fit.flag = RateFlag::ok;
  }
  return fit;
}

}  // namespace ck
