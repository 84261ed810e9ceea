#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace ck {

enum class RateFlag { ok, flat, floor, noisy, insufficient };

const char* to_string(RateFlag flag);

/// Empirical convergence order from a log-log least-squares fit.
struct RateFit {
  double slope = 0.0;
  /// Largest absolute misfit in log space over the fitted points.
  double residual = 0.0;
  /// 95% confidence interval of the slope (Student t on the fitted points).
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
  RateFlag flag = RateFlag::insufficient;

  bool usable() const { return flag == RateFlag::ok; }
};

inline constexpr std::size_t kRateTailPoints = 4;
inline constexpr double kRateFloor = 1e-12;
inline constexpr double kFlatSlope = 0.1;
inline constexpr double kNoisyResidual = 0.25;

/// Slope of log(error) against log(1/n) over the last four points. Errors at or below
/// `floor` mark the fit as having hit machine precision.
RateFit fit_rate(std::span<const double> errors, std::span<const std::size_t> ns, double floor = kRateFloor);

}  // namespace ck
