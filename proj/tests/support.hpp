#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "chernoff_kit/state.hpp"

namespace ckt {

using ck::Index;
using ck::Matrix;
using ck::Scalar;
using ck::Vector;

inline std::mt19937_64 rng_for(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Vector random_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(normal(rng), normal(rng));
  return v;
}

inline Vector random_unit(std::mt19937_64& rng, Index n) {
  Vector v = random_vector(rng, n);
  return v / v.norm();
}

inline Matrix random_matrix(std::mt19937_64& rng, Index n) {
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j) m.col(j) = random_vector(rng, n);
  return m;
}

inline Scalar random_scalar(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return {normal(rng), normal(rng)};
}

/// Random S - P with S skew-adjoint and P positive semidefinite, both of spectral norm <= 1.
inline Matrix random_dissipative(std::mt19937_64& rng, Index n) {
  const Matrix g = random_matrix(rng, n);
  const Matrix c = random_matrix(rng, n);
  Matrix s = (g - g.adjoint()) / 2.0;
  Matrix p = c * c.adjoint();
  s /= s.operatorNorm();
  p /= p.operatorNorm();
  return s - p;
}

/// Taylor series with scaling and squaring; shares no code with the library's Pade path.
inline Matrix series_expm(const Matrix& a) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
  const Matrix x = a / std::ldexp(1.0, squarings);
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Eigen's own matrix exponential (unsupported module).
inline Matrix eigen_expm(const Matrix& a) { return a.exp(); }

inline double rel_diff(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace ckt
