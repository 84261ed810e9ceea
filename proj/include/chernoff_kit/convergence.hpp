#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chernoff_kit/chernoff_fn.hpp"
#include "chernoff_kit/diagnostics.hpp"
#include "chernoff_kit/parallel.hpp"
#include "chernoff_kit/rates.hpp"
#include "chernoff_kit/semigroup.hpp"
#include "chernoff_kit/seminorm.hpp"

namespace ck {

/// Error table of F(t/n)^n h against a reference over an (alpha, t, n) grid.
struct ConvergenceReport {
  std::vector<std::string> seminorms;
  std::vector<std::size_t> n_grid;
  std::vector<double> t_grid;
  /// Without a reference, errors are differences between consecutive n (the first n is dropped).
  bool self_referenced = false;
  /// Flat [alpha][t][n].
  std::vector<double> errors;
  /// Flat [alpha][n]; max over t of errors.
  std::vector<double> uniform_errors;
  std::vector<RateFit> fitted_rate;
  std::optional<StabilityFit> stability_estimate;

  double error(std::size_t alpha, std::size_t ti, std::size_t ni) const {
    return errors[(alpha * t_grid.size() + ti) * n_grid.size() + ni];
  }
  double uniform_error(std::size_t alpha, std::size_t ni) const { return uniform_errors[alpha * n_grid.size() + ni]; }
  std::vector<double> uniform_curve(std::size_t alpha) const;
  double max_error() const;
};

struct ConvergeOptions {
  Exec exec = Exec::parallel;
  /// When set, stability_estimate is filled from this lattice.
  std::optional<LatticeSpec> stability_lattice;
  std::size_t stability_trials = 2;
  std::uint64_t stability_seed = 0x57ab;
  double rate_floor = kRateFloor;
};

ConvergenceReport chernoff_converge(const ChernoffFn& f, const std::optional<SemigroupEvaluator>& reference,
                                    const StateVector& h, double t0, const std::vector<std::size_t>& n_grid,
                                    const std::vector<double>& t_grid, const SeminormFamily& seminorms,
                                    const ConvergeOptions& options = {});

struct UniquenessReport {
  std::vector<std::string> labels;
  /// [pair index] for pairs (i, j), i < j, in lexicographic order.
  std::vector<double> pair_deviation;
  double max_deviation = 0.0;
};

/// Largest deviation between the product paths F(t0/n)^{[t n / t0]} h of Chernoff functions
/// that claim the same derivative, over pairs, t_grid, and seminorms.
UniquenessReport uniqueness_cross_check(const std::vector<ChernoffFn>& functions, const StateVector& h, double t0,
                                        std::size_t n_big, const std::vector<double>& t_grid,
                                        const SeminormFamily& seminorms, Exec exec = Exec::parallel);

}  // namespace ck
