#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "chernoff_kit/diagnostics.hpp"
#include "chernoff_kit/parallel.hpp"
#include "chernoff_kit/semigroup.hpp"
#include "chernoff_kit/seminorm.hpp"

namespace ck {

/// s -> Z_s sampled on a decreasing positive s_grid; Z_0 is at(0).
struct GeneratorFamily {
  std::function<LinOp(double)> at;
  std::vector<double> s_grid;
  std::string label;

  /// Z_s = Z_0 + s W.
  static GeneratorFamily linear(const LinOp& z0, const LinOp& w, std::vector<double> s_grid);
  /// {2^-1, ..., 2^-10}.
  static std::vector<double> default_s_grid();
  Index dim() const;
};

struct CoreWitness {
  StateVector f;
  std::function<StateVector(double)> family;
};

struct EquicontinuityReport {
  StabilityFit fit;
  /// M exp(a l0) from the fit.
  double bound = 0.0;
  bool pass = false;
};

inline constexpr double kEquicontinuityBoundCap = 1e8;

/// Uniform bound ||exp(l Z_s)|| <= M exp(a l) over l in (0, l0] (l_count points) and s in
/// s_grid. Passes when the fit is finite and M exp(a l0) <= bound_cap.
EquicontinuityReport family_equicontinuity(const GeneratorFamily& family, double l0, std::size_t l_count,
                                           double bound_cap = kEquicontinuityBoundCap,
                                           Exec exec = Exec::parallel);

struct CoreReport {
  /// Per witness: ||f_s - f|| and ||Z_s f_s - Z_0 f|| decrease along the s tail.
  std::vector<bool> witness_converges;
  Index witness_rank = 0;
  Index combined_rank = 0;
  bool spans = false;
  bool pass = false;
};

inline constexpr double kGramRankTolerance = 1e-8;

CoreReport core_condition_check(const GeneratorFamily& family, const std::vector<CoreWitness>& witnesses,
                                const std::vector<StateVector>& density_basis, const SeminormFamily& seminorms);

struct SweepReport {
  std::vector<double> s_grid;
  std::vector<std::string> seminorms;
  /// [alpha][i] = sup_l ||exp(l Z_s) f - exp(l Z_0) f||_alpha at s_grid[i].
  std::vector<std::vector<double>> sup_error;
  bool pass = false;
};

SweepReport semigroup_convergence_sweep(const GeneratorFamily& family, const StateVector& f, double t0,
                                        const std::vector<double>& l_grid, const SeminormFamily& seminorms,
                                        Exec exec = Exec::parallel);

struct IntegralElement {
  StateVector integral;
  /// ||Z (integral) - (T(s2) f - T(s1) f)||_2.
  double defect = 0.0;
};

/// Composite trapezoid with quadrature_n intervals for the integral of T(l) f over [s1, s2].
IntegralElement core_elements_from_integrals(const SemigroupEvaluator& semigroup, const StateVector& f, double s1,
                                             double s2, std::size_t quadrature_n);

enum class WitnessSource {
  /// g = b: f = Q_0 b.
  basis,
  /// g = Q_0^{-1} b: f = b, so the witnesses reproduce a basis that does not span the whole space.
  preimage,
};

/// Witnesses f = Q_0 g, f_s = Q_s g with Q_s = int_0^width T_s(l) dl (trapezoid), one per basis vector b.
std::vector<CoreWitness> integral_witnesses(const GeneratorFamily& family, const std::vector<StateVector>& basis,
                                            double width, std::size_t quadrature_n,
                                            WitnessSource source = WitnessSource::basis);

std::vector<StateVector> standard_basis(Index dim);

/// exp(l Z): elementwise for diagonal and spectral generators, dense Pade otherwise.
LinOp propagator(const LinOp& z, double l);
/// Operator 2-norm: max |entry| for diagonal and spectral operators, from the eigenvalues of T*T otherwise.
double operator_norm(const LinOp& op);

}  // namespace ck
