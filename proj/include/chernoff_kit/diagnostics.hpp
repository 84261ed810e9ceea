#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "chernoff_kit/chernoff_fn.hpp"
#include "chernoff_kit/parallel.hpp"
#include "chernoff_kit/seminorm.hpp"

namespace ck {

/// A family s -> f_s with f_s -> target and s^{-1}(F(s) - I) f_s -> claimed_limit.
struct ApproximatingFamily {
  std::function<StateVector(double)> build;
  StateVector target;
  StateVector claimed_limit;

  /// f_s = f for every s.
  static ApproximatingFamily constant(const StateVector& f, const StateVector& g);
};

struct ProbeReport {
  std::vector<double> s_grid;
  std::vector<std::string> seminorms;
  /// [alpha][i] = ||f_s - f||_alpha at s_grid[i].
  std::vector<std::vector<double>> approximation_error;
  /// [alpha][i] = ||s^{-1}(F(s) - I) f_s - g||_alpha.
  std::vector<std::vector<double>> quotient_error;
  /// s^{-1}(F(s) - I) f_s at each s.
  std::vector<StateVector> quotients;
  /// [alpha] = 1e-6 (1 + ||g||_alpha).
  std::vector<double> tolerance;
  bool pass = false;
};

/// Numerical check that claimed_limit belongs to the effective derivative of F at target.
/// A failing probe is a verdict, never an exception.
ProbeReport effective_derivative_probe(const ChernoffFn& f, const ApproximatingFamily& family,
                                       const std::vector<double>& s_grid, const SeminormFamily& seminorms);

struct ConsistencyCurve {
  /// Sorted decreasing.
  std::vector<double> eps_grid;
  std::vector<std::string> seminorms;
  /// [alpha][j] = largest sampled deviation for eps_grid[j].
  std::vector<std::vector<double>> max_deviation;
  std::size_t samples = 0;
  /// Deviations decrease with eps over the last three values for every seminorm.
  bool pass = false;
};

/// max ||(F^i(t/k) - I) g|| over samples with t i / k <= eps.
ConsistencyCurve small_step_consistency(const ChernoffFn& f, const StateVector& g, std::vector<double> eps_grid,
                                        const SeminormFamily& seminorms, Exec exec = Exec::parallel);

/// max ||(F^i(t/k) - F^l(t/k)) g|| over samples with |t (i - l) / k| <= eps and t i / k, t l / k <= s.
ConsistencyCurve step_difference_consistency(const ChernoffFn& f, const StateVector& g, double s,
                                             std::vector<double> eps_grid, const SeminormFamily& seminorms,
                                             Exec exec = Exec::parallel);

/// Sampled ||F(step)^m|| at tau = m * step.
struct NormSample {
  double tau = 0.0;
  double norm = 0.0;
};

struct StabilityFit {
  double M = 1.0;
  double a = 0.0;
  std::vector<NormSample> samples;
  /// True when norms came from power iteration on F*F, false for a random-vector lower bound.
  bool used_adjoint = false;
};

/// Fits M >= 1 and a >= 0 with every sample satisfying norm <= M exp(a tau).
StabilityFit fit_stability(std::vector<NormSample> samples, double horizon);

/// Power-iteration (20 iterations) estimates of ||F(step)^m|| over the lattice, fitted to
/// M exp(a m step). Powers per step are sampled geometrically up to the lattice cap.
StabilityFit stability_estimate(const ChernoffFn& f, const LatticeSpec& lattice, std::size_t trials,
                                std::uint64_t seed = 0x57ab, Exec exec = Exec::parallel);

struct RegularityTable {
  std::vector<std::string> seminorms;
  double delta = 0.0;
  double refined_delta = 0.0;
  /// [alpha] = max_i ||Z f(t_i) - Z f(t_{i+1})||.
  std::vector<double> modulus;
  std::vector<double> refined_modulus;
  bool pass = false;
};

/// Modulus of continuity of t -> Z f(t) along derivative_path on t_grid and on t_grid with
/// midpoints inserted; passes when refinement shrinks the modulus.
RegularityTable regularity_check(const ChernoffFn& f, const LinOp& z, const StateVector& h, double t0,
                                 std::size_t n, std::vector<double> t_grid, const SeminormFamily& seminorms);

/// True when values[i+1] < values[i] (or values[i+1] <= floor) over the last `tail` entries.
bool decreasing_tail(const std::vector<double>& values, std::size_t tail, double floor);

}  // namespace ck
