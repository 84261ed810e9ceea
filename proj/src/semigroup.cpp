#include "chernoff_kit/semigroup.hpp"

#include <cmath>

#include "chernoff_kit/expm.hpp"

namespace ck {

const char* to_string(SemigroupMethod method) {
  switch (method) {
    case SemigroupMethod::dense_expm: return "dense_expm";
    case SemigroupMethod::spectral: return "spectral";
    case SemigroupMethod::closed_form: return "closed_form";
  }
  return "unknown";
}

SemigroupEvaluator::SemigroupEvaluator(LinOp generator, SemigroupMethod method, std::optional<Stability> stability)
    : generator_(std::move(generator)), method_(method), stability_(stability) {
  switch (method_) {
    case SemigroupMethod::dense_expm:
      dense_generator_ = std::make_shared<const Matrix>(generator_.to_dense());
      break;
    case SemigroupMethod::spectral:
      if (generator_.kind() != OpKind::diagonal && generator_.kind() != OpKind::spectral_multiplier) {
        throw InvalidArgument(std::string("spectral semigroup needs a diagonal or spectral generator, got ") +
                              to_string(generator_.kind()));
      }
      break;
    case SemigroupMethod::closed_form:
      throw InvalidArgument("closed-form semigroups are built with SemigroupEvaluator::closed_form");
  }
}

SemigroupEvaluator SemigroupEvaluator::closed_form(LinOp generator, std::function<LinOp(double)> propagator,
                                                   std::optional<Stability> stability) {
  if (!propagator) throw InvalidArgument("closed-form semigroup without a propagator");
  return SemigroupEvaluator(std::move(generator), std::move(propagator), stability);
}

SemigroupEvaluator::SemigroupEvaluator(LinOp generator, std::function<LinOp(double)> propagator,
                                       std::optional<Stability> stability)
    : generator_(std::move(generator)),
      method_(SemigroupMethod::closed_form),
      stability_(stability),
      propagator_(std::move(propagator)) {}

LinOp SemigroupEvaluator::at(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidArgument("semigroup evaluated at t=" + std::to_string(t) + "; only t >= 0 is defined");
  }
  switch (method_) {
    case SemigroupMethod::dense_expm:
      return LinOp::dense(expm(t * *dense_generator_));
    case SemigroupMethod::spectral: {
      const Vector& values =
          generator_.kind() == OpKind::diagonal ? generator_.diagonal_entries() : generator_.symbol();
      return generator_.with_values((t * values).array().exp().matrix());
    }
    case SemigroupMethod::closed_form: {
      LinOp op = propagator_(t);
      require_dim("closed-form propagator", generator_.dim(), op.dim());
      return op;
    }
  }
  throw InvalidArgument("unknown semigroup method");
}

LinOp SemigroupEvaluator::adjoint_at(double t) const { return at(t).adjoint(); }

StateVector SemigroupEvaluator::apply(double t, const StateVector& x) const {
  require_dim("SemigroupEvaluator::apply", dim(), x.dim());
  Vector y = at(t).apply(x.coords());
  ensure_finite(y, "expm_reference at t=" + std::to_string(t));
  return x.with_coords(std::move(y));
}

StateVector expm_reference(const SemigroupEvaluator& semigroup, double t, const StateVector& x) {
  return semigroup.apply(t, x);
}

}  // namespace ck
