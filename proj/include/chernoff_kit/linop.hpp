#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "chernoff_kit/state.hpp"

namespace ck {

class SeminormFamily;
struct FftPlan;

enum class OpKind { dense, diagonal, spectral_multiplier, grid_stencil, composition };

const char* to_string(OpKind kind);

/// One coefficient of a grid stencil: y_j += coeff * x_{j + offset}.
struct StencilTap {
  int offset = 0;
  Scalar coeff{};
};

/// Linear operator on C^n. Immutable after construction; all members are safe to call
/// concurrently.
class LinOp {
 public:
  static LinOp dense(Matrix m);
  static LinOp diagonal(Vector d);
  /// x -> IDFT(symbol .* DFT(x)), symbol indexed by DFT frequency slot.
  static LinOp spectral_multiplier(Vector symbol);
  /// Taps outside [0, dim) wrap around when periodic and are dropped otherwise.
  static LinOp stencil(Index dim, std::vector<StencilTap> taps, bool periodic = true);
  /// factors = {L1, L2, ..., Lk} represents L1 L2 ... Lk (Lk acts first).
  static LinOp compose(std::vector<LinOp> factors);
  static LinOp identity(Index n);
  static LinOp zero(Index n);

  OpKind kind() const;
  Index dim() const { return dim_; }

  Vector apply(const Vector& x) const;
  StateVector apply(const StateVector& x) const;
  LinOp adjoint() const;
  Matrix to_dense() const;
  LinOp scaled(Scalar c) const;
  /// Same diagonal or spectral structure with new entries (reuses the FFT plan).
  LinOp with_values(Vector values) const;

  /// Payload access; throws InvalidArgument when the kind does not match.
  const Matrix& matrix() const;
  const Vector& diagonal_entries() const;
  const Vector& symbol() const;
  const std::vector<StencilTap>& taps() const;
  bool periodic() const;
  const std::vector<LinOp>& factors() const;

  friend LinOp operator+(const LinOp& a, const LinOp& b);
  friend LinOp operator-(const LinOp& a, const LinOp& b);

 private:
  struct Dense {
    Matrix m;
  };
  struct Diagonal {
    Vector d;
  };
  struct Spectral {
    Vector symbol;
    std::shared_ptr<const FftPlan> plan;
  };
  struct Stencil {
    std::vector<StencilTap> taps;
    bool periodic;
  };
  struct Composition {
    std::vector<LinOp> factors;
  };
  using Payload = std::variant<Dense, Diagonal, Spectral, Stencil, Composition>;

  LinOp(Index dim, Payload payload) : dim_(dim), payload_(std::move(payload)) {}

  Index dim_;
  Payload payload_;
};

StateVector apply(const LinOp& op, const StateVector& x);
LinOp adjoint(const LinOp& op);

/// Closure of a finite-dimensional operator is the operator itself.
inline const LinOp& closure(const LinOp& op) { return op; }

struct DissipativityReport {
  bool dissipative = false;
  /// Largest eigenvalue of the Hermitian part (L + L*)/2.
  double max_hermitian_eigenvalue = 0.0;
  /// Largest sampled Re<Lx, x> over unit x.
  double worst_sampled = 0.0;
  /// Eigenvector of the Hermitian part achieving max_hermitian_eigenvalue.
  Vector witness;
};

DissipativityReport is_dissipative(const LinOp& op, std::size_t trials, double tol,
                                   std::uint64_t seed = 0x5eed);
/// Same check, but first requires an inner-product (l2) member in the family.
DissipativityReport is_dissipative(const SeminormFamily& family, const LinOp& op,
                                   std::size_t trials, double tol, std::uint64_t seed = 0x5eed);

/// Prepared solver for (I - sL) y = x. Every solve verifies the residual.
class Resolvent {
 public:
  Resolvent(const LinOp& op, double s);

  Vector solve(const Vector& x) const;
  /// Solver for the adjoint system (I - s L*) y = x.
  Vector solve_adjoint(const Vector& x) const;
  double s() const { return s_; }

  static constexpr double kResidualTolerance = 1e-10;

 private:
  void check_residual(const LinOp& op, const Vector& x, const Vector& y) const;

  LinOp op_;
  LinOp op_adjoint_;
  double s_;
  std::optional<LinOp> direct_;
  std::optional<LinOp> direct_adjoint_;
  /// Diagonal case: 1 - s d, divided per solve.
  std::optional<Vector> pivots_;
  std::shared_ptr<const Eigen::PartialPivLU<Matrix>> lu_;
  std::shared_ptr<const Eigen::PartialPivLU<Matrix>> lu_adjoint_;
};

StateVector resolvent_apply(const LinOp& op, double s, const StateVector& x);

/// Plain-text matrix: first line "rows cols", then row-major whitespace-separated reals.
Matrix load_matrix_file(const std::filesystem::path& path);
LinOp load_dense_operator(const std::filesystem::path& path);

}  // namespace ck
