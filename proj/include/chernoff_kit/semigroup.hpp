#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "chernoff_kit/chernoff_fn.hpp"

namespace ck {

enum class SemigroupMethod { dense_expm, spectral, closed_form };

const char* to_string(SemigroupMethod method);

/// T(t) = exp(tZ) for a fixed generator Z, computed by the declared method. This is the
/// reference side of every convergence check.
class SemigroupEvaluator {
 public:
  /// dense_expm works for any generator; spectral needs a diagonal or spectral-multiplier one.
  SemigroupEvaluator(LinOp generator, SemigroupMethod method, std::optional<Stability> stability = {});

  /// T(t) supplied in closed form (e.g. multiplication by e^{tz}).
  static SemigroupEvaluator closed_form(LinOp generator, std::function<LinOp(double)> propagator,
                                        std::optional<Stability> stability = {});

  const LinOp& generator() const { return generator_; }
  SemigroupMethod method() const { return method_; }
  const std::optional<Stability>& stability() const { return stability_; }
  Index dim() const { return generator_.dim(); }

  /// Operator T(t); t < 0 is rejected.
  LinOp at(double t) const;
  /// Operator T(t)* = exp(t Z*).
  LinOp adjoint_at(double t) const;
  StateVector apply(double t, const StateVector& x) const;

 private:
  SemigroupEvaluator(LinOp generator, std::function<LinOp(double)> propagator, std::optional<Stability> stability);

  LinOp generator_;
  SemigroupMethod method_;
  std::optional<Stability> stability_;
  std::shared_ptr<const Matrix> dense_generator_;
  std::function<LinOp(double)> propagator_;
};

StateVector expm_reference(const SemigroupEvaluator& semigroup, double t, const StateVector& x);

}  // namespace ck
