#include "chernoff_kit/seminorm.hpp"

#include <algorithm>
#include <cmath>

namespace ck {

SeminormFamily::SeminormFamily(Index dim, std::vector<Seminorm> members) : dim_(dim), members_(std::move(members)) {
  if (members_.empty()) throw InvalidArgument("seminorm family must have at least one member");
  for (const auto& m : members_) {
    if (!m.eval) throw InvalidArgument("seminorm '" + m.label + "' has no evaluator");
  }
}

Seminorm SeminormFamily::l2() {
  return {"l2", [](const Vector& x) { return x.norm(); }, true};
}

Seminorm SeminormFamily::sup() {
  return {"sup", [](const Vector& x) { return x.size() == 0 ? 0.0 : std::sqrt(x.cwiseAbs2().maxCoeff()); }, false};
}

Seminorm SeminormFamily::l1() {
  return {"l1", [](const Vector& x) { return x.cwiseAbs().sum(); }, false};
}

Seminorm SeminormFamily::sup_on(std::string label, std::vector<Index> indices) {
  return {std::move(label),
          [indices = std::move(indices)](const Vector& x) {
            double best = 0.0;
            for (Index i : indices) best = std::max(best, std::norm(x(i)));
            return std::sqrt(best);
          },
          false};
}

SeminormFamily SeminormFamily::standard(Index dim) { return SeminormFamily(dim, {l2(), sup()}); }

const std::string& SeminormFamily::label(std::size_t alpha) const {
  if (alpha >= members_.size()) {
    throw IndexOutOfRange("seminorm index " + std::to_string(alpha) + " out of range (family has " +
                          std::to_string(members_.size()) + ")");
  }
  return members_[alpha].label;
}

std::vector<std::string> SeminormFamily::labels() const {
  std::vector<std::string> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.label);
  return out;
}

bool SeminormFamily::has_inner_product() const {
  return std::any_of(members_.begin(), members_.end(), [](const Seminorm& m) { return m.inner_product; });
}

double SeminormFamily::evaluate(std::size_t alpha, const Vector& x) const {
  label(alpha);
  if (dim_ != 0) require_dim("seminorm '" + members_[alpha].label + "'", dim_, x.size());
  return members_[alpha].eval(x);
}

double eval_seminorm(const SeminormFamily& family, std::size_t alpha, const StateVector& x) {
  return family.evaluate(alpha, x.coords());
}

namespace {

std::size_t max_power(double step, double s) {
  if (s <= 0.0) return 0;
  auto m = static_cast<std::size_t>(std::floor(s / step));
  while (m > 0 && static_cast<double>(m) * step > s) --m;
  while (static_cast<double>(m + 1) * step <= s) ++m;
  return m;
}

}  // namespace

LatticeSpec::LatticeSpec(double s_max, std::vector<double> steps) : s_max_(s_max), steps_(std::move(steps)) {
  if (!(s_max_ >= 0.0) || !std::isfinite(s_max_)) throw InvalidArgument("lattice horizon must be finite and >= 0");
  for (double step : steps_) {
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("lattice steps must be positive and finite");
  }
  std::sort(steps_.begin(), steps_.end(), std::greater<>());
  steps_.erase(std::unique(steps_.begin(), steps_.end()), steps_.end());
  caps_.reserve(steps_.size());
  for (double step : steps_) caps_.push_back(max_power(step, s_max_));
}

LatticeSpec LatticeSpec::geometric(double s_max, double step_min, std::size_t per_decade) {
  if (!(step_min > 0.0) || per_decade == 0) throw InvalidArgument("geometric lattice needs step_min > 0");
  std::vector<double> steps;
  if (s_max <= 0.0) return LatticeSpec(0.0, {step_min});
  for (std::size_t k = 0;; ++k) {
    const double step = s_max * std::pow(10.0, -static_cast<double>(k) / static_cast<double>(per_decade));
    if (step < step_min * (1.0 - 1e-12)) break;
    steps.push_back(step);
  }
  return LatticeSpec(s_max, std::move(steps));
}

std::size_t LatticeSpec::cap(std::size_t i, double s) const {
  if (i >= steps_.size()) throw IndexOutOfRange("lattice step index out of range");
  return max_power(steps_[i], std::min(s, s_max_));
}

std::size_t LatticeSpec::point_count(double s) const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < steps_.size(); ++i) total += cap(i, s) + 1;
  return total;
}

LatticeSpec LatticeSpec::refined() const {
  std::vector<double> steps = steps_;
  for (std::size_t i = 0; i + 1 < steps_.size(); ++i) steps.push_back(std::sqrt(steps_[i] * steps_[i + 1]));
  return LatticeSpec(s_max_, std::move(steps));
}

LatticeSpec LatticeSpec::extended(double s_max) const { return LatticeSpec(s_max, steps_); }

namespace {

void require_horizon(const LatticeSpec& lattice, double s) {
  if (!(s >= 0.0)) throw InvalidArgument("derived seminorm needs s >= 0");
  if (s > lattice.s_max() * (1.0 + 1e-12)) {
    throw InvalidArgument("lattice horizon " + std::to_string(lattice.s_max()) + " is shorter than s=" +
                          std::to_string(s));
  }
}

// value(x, level) = sup over g in B_{s_level} of value(g x, level - 1); level -1 is the base seminorm.
double nested_sup(const SeminormFamily& family, std::size_t alpha,
                  const std::vector<std::pair<ChernoffFn, double>>& specs, const LatticeSpec& lattice,
                  const Vector& x, long level, Exec exec) {
  if (level < 0) return family.evaluate(alpha, x);
  const auto& [f, s] = specs[static_cast<std::size_t>(level)];
  require_dim("derived seminorm (" + f.label() + ")", f.dim(), x.size());
  const auto& steps = lattice.steps();
  std::vector<double> per_step(steps.size(), 0.0);
  for_each_index(exec, steps.size(), [&](std::size_t i) {
    const std::size_t cap = lattice.cap(i, s);
    double best = nested_sup(family, alpha, specs, lattice, x, level - 1, Exec::serial);
    if (cap == 0) {
      per_step[i] = best;
      return;
    }
    const StepOp step = f.at(steps[i]);
    Vector y = x;
    for (std::size_t m = 1; m <= cap; ++m) {
      y = step(y);
      best = std::max(best, nested_sup(family, alpha, specs, lattice, y, level - 1, Exec::serial));
    }
    per_step[i] = best;
  });
  double best = nested_sup(family, alpha, specs, lattice, x, level - 1, Exec::serial);
  for (double v : per_step) best = std::max(best, v);
  return best;
}

}  // namespace

double derived_seminorm(const SeminormFamily& family, std::size_t alpha, const ChernoffFn& f, double s,
                        const LatticeSpec& lattice, const StateVector& x, Exec exec) {
  require_horizon(lattice, s);
  return nested_sup(family, alpha, {{f, s}}, lattice, x.coords(), 0, exec);
}

double iterated_derived_seminorm(const SeminormFamily& family, std::size_t alpha,
                                 const std::vector<std::pair<ChernoffFn, double>>& specs,
                                 const LatticeSpec& lattice, const StateVector& x, Exec exec) {
  if (specs.empty()) return eval_seminorm(family, alpha, x);
  for (const auto& spec : specs) require_horizon(lattice, spec.second);
  return nested_sup(family, alpha, specs, lattice, x.coords(), static_cast<long>(specs.size()) - 1, exec);
}

}  // namespace ck
