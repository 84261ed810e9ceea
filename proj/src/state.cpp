#include "chernoff_kit/state.hpp"

#include <cmath>

namespace ck {

std::shared_ptr<const Space> Space::make(std::string id, Index dim, Field field) {
  if (dim <= 0) throw InvalidArgument("space '" + id + "' must have positive dimension");
  return std::make_shared<const Space>(Space{std::move(id), dim, field});
}

std::shared_ptr<const Space> Space::coordinates(Index dim) {
  return make("C^" + std::to_string(dim), dim, Field::complex);
}

bool same_space(const Space& a, const Space& b) { return a.id == b.id && a.dim == b.dim; }

StateVector::StateVector(std::shared_ptr<const Space> space, Vector coords)
    : space_(std::move(space)), coords_(std::move(coords)) {
  if (!space_) throw InvalidArgument("state vector without a space");
  require_dim("StateVector(" + space_->id + ")", space_->dim, coords_.size());
}

StateVector::StateVector(Vector coords) : space_(Space::coordinates(coords.size())), coords_(std::move(coords)) {}

StateVector::StateVector(std::initializer_list<Scalar> coords) : StateVector([&] {
    Vector v(static_cast<Index>(coords.size()));
    Index i = 0;
    for (const auto& c : coords) v(i++) = c;
    return v;
  }()) {}

StateVector StateVector::with_coords(Vector coords) const { return StateVector(space_, std::move(coords)); }

bool StateVector::all_finite() const { return ck::all_finite(coords_); }

bool all_finite(const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag())) return false;
  }
  return true;
}

void ensure_finite(const Vector& v, const std::string& context) {
  if (!all_finite(v)) throw NonFiniteValue(context + ": non-finite entry");
}

void require_dim(const std::string& where, Index expected, Index got) {
  if (expected != got) throw DimensionMismatch(where, static_cast<long>(expected), static_cast<long>(got));
}

}  // namespace ck
