#include "chernoff_kit/chernoff.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

namespace ck {

ChernoffFn::ChernoffFn(std::string label, Index dim, StepFactory forward, StepFactory adjoint,
                       std::optional<LinOp> claimed_derivative, std::optional<Stability> stability)
    : label_(std::move(label)),
      dim_(dim),
      forward_(std::move(forward)),
      adjoint_(std::move(adjoint)),
      claimed_derivative_(std::move(claimed_derivative)),
      stability_(stability) {
  if (dim_ <= 0) throw InvalidArgument("Chernoff function '" + label_ + "' needs a positive dimension");
  if (!forward_) throw InvalidArgument("Chernoff function '" + label_ + "' has no step factory");
  if (claimed_derivative_) require_dim("claimed derivative of " + label_, dim_, claimed_derivative_->dim());
  if (stability_ && !(stability_->M >= 1.0)) throw InvalidArgument("stability constant M must be >= 1");
}

ChernoffFn ChernoffFn::identity(Index dim) {
  auto factory = [](double) -> StepOp { return [](const Vector& x) { return x; }; };
  return ChernoffFn("identity", dim, factory, factory, LinOp::zero(dim), Stability{1.0, 0.0});
}

namespace {

StepOp checked(StepOp step, Index dim, const std::string& label) {
  return [step = std::move(step), dim, label](const Vector& x) {
    require_dim("Chernoff step (" + label + ")", dim, x.size());
    return step(x);
  };
}

void require_step(double s, const std::string& label) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw InvalidArgument("Chernoff function '" + label + "' evaluated at s=" + std::to_string(s));
  }
}

}  // namespace

StepOp ChernoffFn::at(double s) const {
  require_step(s, label_);
  if (s == 0.0) return checked([](const Vector& x) { return x; }, dim_, label_);
  return checked(forward_(s), dim_, label_);
}

StepOp ChernoffFn::adjoint_at(double s) const {
  require_step(s, label_);
  if (!adjoint_) throw InvalidArgument("Chernoff function '" + label_ + "' has no adjoint");
  if (s == 0.0) return checked([](const Vector& x) { return x; }, dim_, label_);
  return checked(adjoint_(s), dim_, label_);
}

StateVector ChernoffFn::eval(double s, const StateVector& x) const { return x.with_coords(at(s)(x.coords())); }

ChernoffFn ChernoffFn::relabeled(std::string label) const {
  ChernoffFn out = *this;
  out.label_ = std::move(label);
  return out;
}

ProductResult product_apply(const ChernoffFn& f, double t, std::size_t n, const StateVector& h) {
  if (n == 0) throw InvalidArgument("product_apply needs n >= 1");
  if (!(t >= 0.0)) throw InvalidArgument("product_apply needs t >= 0");
  const StepOp step = f.at(t / static_cast<double>(n));
  Vector y = h.coords();
  for (std::size_t k = 1; k <= n; ++k) {
    y = step(y);
    if (!all_finite(y)) {
      throw NonFiniteValue(f.label() + ": non-finite value after application " + std::to_string(k) + " of " +
                           std::to_string(n));
    }
  }
  return {h.with_coords(std::move(y)), n};
}

std::size_t path_power(double s, double t, std::size_t n) {
  if (t <= 0.0) return 0;
  if (s == t) return n;
  const double q = s * static_cast<double>(n) / t;
  return static_cast<std::size_t>(std::floor(q * (1.0 + 4.0 * DBL_EPSILON)));
}

std::vector<StateVector> product_path(const ChernoffFn& f, double t, std::size_t n, const std::vector<double>& s_grid,
                                      const StateVector& h) {
  if (n == 0) throw InvalidArgument("product_path needs n >= 1");
  if (!(t >= 0.0)) throw InvalidArgument("product_path needs t >= 0");
  require_dim("product_path (" + f.label() + ")", f.dim(), h.dim());
  std::vector<std::size_t> powers(s_grid.size());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    if (!(s >= 0.0) || s > t * (1.0 + 1e-12)) {
      throw InvalidArgument("product_path: s=" + std::to_string(s) + " outside [0, " + std::to_string(t) + "]");
    }
    powers[i] = std::min(path_power(s, t, n), n);
  }
  std::vector<std::size_t> order(s_grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return powers[a] < powers[b]; });

  std::vector<Vector> values(s_grid.size());
  const StepOp step = f.at(t / static_cast<double>(n));
  Vector y = h.coords();
  std::size_t current = 0;
  for (std::size_t idx : order) {
    while (current < powers[idx]) {
      y = step(y);
      ++current;
      if (!all_finite(y)) {
        throw NonFiniteValue(f.label() + ": non-finite value after application " + std::to_string(current));
      }
    }
    values[idx] = y;
  }
  std::vector<StateVector> out;
  out.reserve(values.size());
  for (auto& v : values) out.push_back(h.with_coords(std::move(v)));
  return out;
}

std::vector<StateVector> derivative_path(const ChernoffFn& f, const LinOp& z, double t, std::size_t n,
                                         const std::vector<double>& s_grid, const StateVector& h) {
  return product_path(f, t, n, s_grid, z.apply(h));
}

ChernoffFn lie_trotter(const SemigroupEvaluator& a, const SemigroupEvaluator& b) {
  require_dim("lie_trotter", a.dim(), b.dim());
  auto forward = [a, b](double s) -> StepOp {
    LinOp ta = a.at(s);
    LinOp tb = b.at(s);
    return [ta = std::move(ta), tb = std::move(tb)](const Vector& x) { return ta.apply(tb.apply(x)); };
  };
  auto adjoint = [a, b](double s) -> StepOp {
    LinOp ta = a.adjoint_at(s);
    LinOp tb = b.adjoint_at(s);
    return [ta = std::move(ta), tb = std::move(tb)](const Vector& x) { return tb.apply(ta.apply(x)); };
  };
  std::optional<Stability> stability;
  if (a.stability() && b.stability()) {
    stability = Stability{a.stability()->M * b.stability()->M, a.stability()->a + b.stability()->a};
  }
  return ChernoffFn("lie_trotter", a.dim(), forward, adjoint, a.generator() + b.generator(), stability);
}

ChernoffFn implicit_euler(const LinOp& z) {
  auto forward = [z](double s) -> StepOp {
    auto resolvent = std::make_shared<const Resolvent>(z, s);
    return [resolvent](const Vector& x) { return resolvent->solve(x); };
  };
  auto adjoint = [z](double s) -> StepOp {
    auto resolvent = std::make_shared<const Resolvent>(z, s);
    return [resolvent](const Vector& x) { return resolvent->solve_adjoint(x); };
  };
  std::optional<Stability> stability;
  if (is_dissipative(z, 0, 1e-12).dissipative) stability = Stability{1.0, 0.0};
  return ChernoffFn("implicit_euler", z.dim(), forward, adjoint, z, stability);
}

ChernoffFn semigroup_chernoff(const SemigroupEvaluator& semigroup) {
  auto forward = [semigroup](double s) -> StepOp {
    LinOp ts = semigroup.at(s);
    return [ts = std::move(ts)](const Vector& x) { return ts.apply(x); };
  };
  auto adjoint = [semigroup](double s) -> StepOp {
    LinOp ts = semigroup.adjoint_at(s);
    return [ts = std::move(ts)](const Vector& x) { return ts.apply(x); };
  };
  return ChernoffFn(std::string("exp_") + to_string(semigroup.method()), semigroup.dim(), forward, adjoint,
                    semigroup.generator(), semigroup.stability());
}

}  // namespace ck
