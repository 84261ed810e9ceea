#pragma once

#include <complex>
#include <initializer_list>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "chernoff_kit/error.hpp"

namespace ck {

using Scalar = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

enum class Field { real, complex };

/// Discretization descriptor. Vectors tied to the same id and dim live in the same space.
struct Space {
  std::string id;
  Index dim = 0;
  Field field = Field::complex;

  static std::shared_ptr<const Space> make(std::string id, Index dim, Field field = Field::complex);
  /// Anonymous coordinate space "C^n".
  static std::shared_ptr<const Space> coordinates(Index dim);
};

bool same_space(const Space& a, const Space& b);

class StateVector {
 public:
  StateVector(std::shared_ptr<const Space> space, Vector coords);
  explicit StateVector(Vector coords);
  StateVector(std::initializer_list<Scalar> coords);

  const Vector& coords() const { return coords_; }
  const Space& space() const { return *space_; }
  const std::shared_ptr<const Space>& space_ptr() const { return space_; }
  Index dim() const { return coords_.size(); }

  /// Same space, new coordinates.
  StateVector with_coords(Vector coords) const;
  bool all_finite() const;

 private:
  std::shared_ptr<const Space> space_;
  Vector coords_;
};

bool all_finite(const Vector& v);
void ensure_finite(const Vector& v, const std::string& context);
void require_dim(const std::string& where, Index expected, Index got);

}  // namespace ck
