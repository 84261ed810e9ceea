#pragma once

#include <functional>
#include <optional>
#include <string>

#include "chernoff_kit/linop.hpp"

namespace ck {

/// One prepared application x -> F(s) x for a fixed s.
using StepOp = std::function<Vector(const Vector&)>;

/// Bound ||F(step)^m|| <= M exp(a m step).
struct Stability {
  double M = 1.0;
  double a = 0.0;
};

/// A map s -> F(s) in L(E) with F(0) = I. Steps are prepared per s so that factorizations
/// and exponentials are built once and reused across the n applications of a product.
class ChernoffFn {
 public:
  using StepFactory = std::function<StepOp(double)>;

  ChernoffFn(std::string label, Index dim, StepFactory forward, StepFactory adjoint = {},
             std::optional<LinOp> claimed_derivative = {}, std::optional<Stability> stability = {});

  /// F(s) = I for every s.
  static ChernoffFn identity(Index dim);

  const std::string& label() const { return label_; }
  Index dim() const { return dim_; }

  /// F(s); at(0) is the identity regardless of the factory.
  StepOp at(double s) const;
  bool has_adjoint() const { return static_cast<bool>(adjoint_); }
  /// F(s)*; throws InvalidArgument when no adjoint was supplied.
  StepOp adjoint_at(double s) const;

  StateVector eval(double s, const StateVector& x) const;

  const std::optional<LinOp>& claimed_derivative() const { return claimed_derivative_; }
  const std::optional<Stability>& stability() const { return stability_; }

  ChernoffFn relabeled(std::string label) const;

 private:
  std::string label_;
  Index dim_;
  StepFactory forward_;
  StepFactory adjoint_;
  std::optional<LinOp> claimed_derivative_;
  std::optional<Stability> stability_;
};

}  // namespace ck
