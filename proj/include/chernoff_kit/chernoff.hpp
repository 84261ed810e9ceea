#pragma once

#include <cstddef>
#include <vector>

#include "chernoff_kit/chernoff_fn.hpp"
#include "chernoff_kit/semigroup.hpp"

namespace ck {

struct ProductResult {
  StateVector value;
  /// Number of F(t/n) applications performed.
  std::size_t applications = 0;
};

/// F(t/n)^n h. Every intermediate is checked for non-finite entries.
ProductResult product_apply(const ChernoffFn& f, double t, std::size_t n, const StateVector& h);

/// Power [s n / t] used by product_path; s = t maps to n exactly.
std::size_t path_power(double s, double t, std::size_t n);

/// F(t/n)^{[s n / t]} h for each s in s_grid (any order), sharing one sweep of powers.
std::vector<StateVector> product_path(const ChernoffFn& f, double t, std::size_t n, const std::vector<double>& s_grid,
                                      const StateVector& h);

/// product_path applied to Z h.
std::vector<StateVector> derivative_path(const ChernoffFn& f, const LinOp& z, double t, std::size_t n,
                                         const std::vector<double>& s_grid, const StateVector& h);

/// F(s) = exp(sA) exp(sB); claimed derivative A + B.
ChernoffFn lie_trotter(const SemigroupEvaluator& a, const SemigroupEvaluator& b);

/// F(s) = (I - sZ)^{-1}; claimed derivative Z; stability (1, 0) when Z is dissipative.
ChernoffFn implicit_euler(const LinOp& z);

/// F(s) = T(s), the semigroup itself.
ChernoffFn semigroup_chernoff(const SemigroupEvaluator& semigroup);

}  // namespace ck
