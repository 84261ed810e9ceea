#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chernoff_kit/chernoff_fn.hpp"
#include "chernoff_kit/parallel.hpp"

namespace ck {

struct Seminorm {
  std::string label;
  std::function<double(const Vector&)> eval;
  /// True when the seminorm is the norm of the standard l2 inner product.
  bool inner_product = false;
};

/// Finite indexed family of seminorms generating the topology of the model space.
class SeminormFamily {
 public:
  /// dim == 0 accepts vectors of any dimension.
  SeminormFamily(Index dim, std::vector<Seminorm> members);

  static Seminorm l2();
  static Seminorm sup();
  static Seminorm l1();
  /// sup over a subset of coordinates (e.g. grid nodes inside a disc).
  static Seminorm sup_on(std::string label, std::vector<Index> indices);

  /// {l2, sup}.
  static SeminormFamily standard(Index dim = 0);

  std::size_t size() const { return members_.size(); }
  Index dim() const { return dim_; }
  const std::string& label(std::size_t alpha) const;
  std::vector<std::string> labels() const;
  bool has_inner_product() const;

  double evaluate(std::size_t alpha, const Vector& x) const;

 private:
  Index dim_;
  std::vector<Seminorm> members_;
};

double eval_seminorm(const SeminormFamily& family, std::size_t alpha, const StateVector& x);

/// Finite sample of B_s^F = {F(step)^m : m step <= s}.
class LatticeSpec {
 public:
  LatticeSpec(double s_max, std::vector<double> steps);

  /// Steps s_max * 10^{-k / per_decade} down to step_min, always including s_max itself.
  static LatticeSpec geometric(double s_max, double step_min, std::size_t per_decade = 20);

  double s_max() const { return s_max_; }
  const std::vector<double>& steps() const { return steps_; }
  const std::vector<std::size_t>& power_caps() const { return caps_; }

  /// Largest m with m * steps()[i] <= s.
  std::size_t cap(std::size_t i, double s) const;
  std::size_t point_count(double s) const;
  /// Superset lattice with a geometric midpoint between neighbouring steps.
  LatticeSpec refined() const;
  /// Same steps with a longer horizon.
  LatticeSpec extended(double s_max) const;

 private:
  double s_max_;
  std::vector<double> steps_;
  std::vector<std::size_t> caps_;
};

/// sup of ||F(step)^m x||_alpha over the lattice points with m step <= s (m = 0 included).
double derived_seminorm(const SeminormFamily& family, std::size_t alpha, const ChernoffFn& f, double s,
                        const LatticeSpec& lattice, const StateVector& x, Exec exec = Exec::parallel);

/// Nested derived seminorm: the last spec is the outermost supremum.
double iterated_derived_seminorm(const SeminormFamily& family, std::size_t alpha,
                                 const std::vector<std::pair<ChernoffFn, double>>& specs,
                                 const LatticeSpec& lattice, const StateVector& x, Exec exec = Exec::parallel);

}  // namespace ck
