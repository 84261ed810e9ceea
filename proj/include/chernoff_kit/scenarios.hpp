#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chernoff_kit/chernoff.hpp"
#include "chernoff_kit/semigroup.hpp"
#include "chernoff_kit/seminorm.hpp"

namespace ck {

/// A reproducible experiment setup: generator, Chernoff functions, reference, seminorms.
struct Scenario {
  std::string name;
  std::shared_ptr<const Space> space;
  /// Z, the generator every Chernoff function claims.
  LinOp generator;
  /// Lie splitting Z = A + B when the scenario has one.
  std::optional<LinOp> part_a;
  std::optional<LinOp> part_b;
  /// chernoff.front() is the scenario's primary Chernoff function.
  std::vector<ChernoffFn> chernoff;
  SemigroupEvaluator reference;
  SeminormFamily seminorms;
  StateVector initial;
  double t0 = 1.0;
  std::vector<std::size_t> n_grid;
  std::vector<double> t_grid;
  /// Expected verdict per suite name.
  std::map<std::string, std::string> expected;
  /// Basis used for core (density) checks.
  std::vector<StateVector> density_basis;

  /// Multiplication example only: complex grid nodes and the seminorm radii.
  std::vector<Scalar> nodes;
  std::vector<double> radii;

  const ChernoffFn& primary() const { return chernoff.front(); }
  Index dim() const { return space->dim; }

  /// F(0) = I for every Chernoff function and the reference semigroup law on random samples.
  /// Throws Error naming the failed invariant.
  void validate(std::uint64_t seed = 0x7a11) const;
};

/// Names of the built-in scenarios.
std::vector<std::string> builtin_scenarios();

/// x_j = 2 pi j / N on the periodic interval [0, 2 pi).
Vector periodic_grid(Index n);
/// -k^2 on the DFT frequency slots of an N-point periodic grid of length 2 pi.
Vector laplacian_symbol(Index n);
/// Gaussian samples normalized to unit l2 norm, optionally with a plane-wave factor e^{i k x}.
Vector gaussian_packet(Index n, double center, double width, double wavenumber = 0.0);

/// A = periodic spectral Laplacian, B = multiplication by -V; Lie product against dense expm of A + B.
Scenario build_heat_potential(Index n, const Eigen::VectorXd& potential);

/// A = i * Laplacian, B = -i V; both factors unitary.
Scenario build_schrodinger(Index n, const Eigen::VectorXd& potential);

struct DissipativeOptions {
  double skew_scale = 1.0;
  /// Spectral norm of P; 0 removes damping.
  double damping_scale = 1.0;
  /// P = damping_scale * I instead of a random positive semidefinite matrix.
  bool identity_damping = false;
};

/// Z = S - P with S random skew-adjoint and P positive semidefinite; implicit Euler first.
Scenario build_dissipative_random(Index dim, std::uint64_t seed, const DissipativeOptions& options = {});

/// Functions sampled on a polar disc grid; Z = multiplication by z, T(s) = multiplication by e^{sz},
/// one sup seminorm per radius.
Scenario build_multiplication_example(std::vector<double> radii, std::size_t radial = 64, std::size_t angular = 128);

struct RangeGapReport {
  double min_defect = 0.0;
  /// Slack from lambda not being a node: |lambda - z*| * max_g |g(z*)|.
  double eps_grid = 0.0;
  Scalar nearest_node{};
  double node_distance = 0.0;
  /// |f(z*)| - eps_grid; the defect of every candidate is at least this.
  double lower_bound = 0.0;
  std::size_t candidates = 0;
  bool pass = false;
};

/// min over candidates g of ||(lambda I - Z) g - f||_r on the multiplication example grid.
RangeGapReport resolvent_range_gap(const Scenario& scenario, Scalar lambda, const StateVector& f,
                                   const std::vector<StateVector>& candidates, double r);

/// Samples of random complex polynomials of the given degree on the scenario nodes.
std::vector<StateVector> random_polynomial_candidates(const Scenario& scenario, std::size_t count, std::size_t degree,
                                                      std::uint64_t seed);

}  // namespace ck
