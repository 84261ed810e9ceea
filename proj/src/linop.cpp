#include "chernoff_kit/linop.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "chernoff_kit/seminorm.hpp"

namespace ck {

// FFTW planning is not thread-safe; execution with the new-array interface is.
struct FftPlan {
  explicit FftPlan(Index n) : n(n) {
    static std::mutex planner_mutex;
    std::lock_guard<std::mutex> lock(planner_mutex);
    Vector in(n), out(n);
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft_1d(static_cast<int>(n), pin, pout, FFTW_FORWARD, flags);
    backward = fftw_plan_dft_1d(static_cast<int>(n), pin, pout, FFTW_BACKWARD, flags);
  }
  ~FftPlan() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  Vector transform(const Vector& x, bool inverse) const {
    Vector in = x;
    Vector out(n);
    fftw_execute_dft(inverse ? backward : forward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  Index n;
  fftw_plan forward;
  fftw_plan backward;
};

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vector apply_multiplier(const FftPlan& plan, const Vector& symbol, const Vector& x) {
  Vector spectrum = plan.transform(x, false);
  spectrum = spectrum.cwiseProduct(symbol);
  Vector y = plan.transform(spectrum, true);
  return y / static_cast<double>(plan.n);
}

Vector random_unit(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(normal(rng), normal(rng));
  return v / v.norm();
}

}  // namespace

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::dense: return "dense";
    case OpKind::diagonal: return "diagonal";
    case OpKind::spectral_multiplier: return "spectral_multiplier";
    case OpKind::grid_stencil: return "grid_stencil";
    case OpKind::composition: return "composition";
  }
  return "unknown";
}

LinOp LinOp::dense(Matrix m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidArgument("dense operator must be square and nonempty, got " + std::to_string(m.rows()) +
                          "x" + std::to_string(m.cols()));
  }
  const Index n = m.rows();
  return LinOp(n, Dense{std::move(m)});
}

LinOp LinOp::diagonal(Vector d) {
  if (d.size() == 0) throw InvalidArgument("diagonal operator must be nonempty");
  const Index n = d.size();
  return LinOp(n, Diagonal{std::move(d)});
}

LinOp LinOp::spectral_multiplier(Vector symbol) {
  if (symbol.size() == 0) throw InvalidArgument("spectral multiplier must be nonempty");
  const Index n = symbol.size();
  auto plan = std::make_shared<const FftPlan>(n);
  return LinOp(n, Spectral{std::move(symbol), std::move(plan)});
}

LinOp LinOp::stencil(Index dim, std::vector<StencilTap> taps, bool periodic) {
  if (dim <= 0) throw InvalidArgument("stencil dimension must be positive");
  return LinOp(dim, Stencil{std::move(taps), periodic});
}

LinOp LinOp::compose(std::vector<LinOp> factors) {
  if (factors.empty()) throw InvalidArgument("composition needs at least one factor");
  const Index n = factors.front().dim();
  for (const auto& f : factors) require_dim("LinOp::compose", n, f.dim());
  return LinOp(n, Composition{std::move(factors)});
}

LinOp LinOp::identity(Index n) { return diagonal(Vector::Ones(n)); }
LinOp LinOp::zero(Index n) { return diagonal(Vector::Zero(n)); }

OpKind LinOp::kind() const {
  return std::visit(overloaded{[](const Dense&) { return OpKind::dense; },
                               [](const Diagonal&) { return OpKind::diagonal; },
                               [](const Spectral&) { return OpKind::spectral_multiplier; },
                               [](const Stencil&) { return OpKind::grid_stencil; },
                               [](const Composition&) { return OpKind::composition; }},
                    payload_);
}

Vector LinOp::apply(const Vector& x) const {
  require_dim(std::string("LinOp::apply(") + to_string(kind()) + ")", dim_, x.size());
  return std::visit(
      overloaded{[&](const Dense& p) -> Vector { return p.m * x; },
                 [&](const Diagonal& p) -> Vector { return p.d.cwiseProduct(x); },
                 [&](const Spectral& p) -> Vector { return apply_multiplier(*p.plan, p.symbol, x); },
                 [&](const Stencil& p) -> Vector {
                   Vector y = Vector::Zero(dim_);
                   for (Index j = 0; j < dim_; ++j) {
                     Scalar acc{};
                     for (const auto& tap : p.taps) {
                       Index k = j + tap.offset;
                       if (p.periodic) {
                         k %= dim_;
                         if (k < 0) k += dim_;
                       } else if (k < 0 || k >= dim_) {
                         continue;
                       }
                       acc += tap.coeff * x(k);
                     }
                     y(j) = acc;
                   }
                   return y;
                 },
                 [&](const Composition& p) -> Vector {
                   Vector y = x;
                   for (auto it = p.factors.rbegin(); it != p.factors.rend(); ++it) y = it->apply(y);
                   return y;
                 }},
      payload_);
}

StateVector LinOp::apply(const StateVector& x) const { return x.with_coords(apply(x.coords())); }

LinOp LinOp::adjoint() const {
  return std::visit(
      overloaded{[&](const Dense& p) { return LinOp::dense(p.m.adjoint()); },
                 [&](const Diagonal& p) { return LinOp::diagonal(p.d.conjugate()); },
                 [&](const Spectral& p) { return LinOp(dim_, Spectral{p.symbol.conjugate(), p.plan}); },
                 [&](const Stencil& p) {
                   std::vector<StencilTap> taps;
                   taps.reserve(p.taps.size());
                   for (const auto& tap : p.taps) taps.push_back({-tap.offset, std::conj(tap.coeff)});
                   return LinOp::stencil(dim_, std::move(taps), p.periodic);
                 },
                 [&](const Composition& p) {
                   std::vector<LinOp> reversed;
                   reversed.reserve(p.factors.size());
                   for (auto it = p.factors.rbegin(); it != p.factors.rend(); ++it)
                     reversed.push_back(it->adjoint());
                   return LinOp::compose(std::move(reversed));
                 }},
      payload_);
}

Matrix LinOp::to_dense() const {
  if (const auto* p = std::get_if<Dense>(&payload_)) return p->m;
  if (const auto* p = std::get_if<Diagonal>(&payload_)) return p->d.asDiagonal();
  Matrix m(dim_, dim_);
  for (Index j = 0; j < dim_; ++j) m.col(j) = apply(Vector::Unit(dim_, j));
  return m;
}

LinOp LinOp::scaled(Scalar c) const {
  return std::visit(
      overloaded{[&](const Dense& p) { return LinOp::dense(c * p.m); },
                 [&](const Diagonal& p) { return LinOp::diagonal(c * p.d); },
                 [&](const Spectral& p) { return LinOp(dim_, Spectral{c * p.symbol, p.plan}); },
                 [&](const Stencil& p) {
                   auto taps = p.taps;
                   for (auto& tap : taps) tap.coeff *= c;
                   return LinOp::stencil(dim_, std::move(taps), p.periodic);
                 },
                 [&](const Composition& p) {
                   auto factors = p.factors;
                   factors.front() = factors.front().scaled(c);
                   return LinOp::compose(std::move(factors));
                 }},
      payload_);
}

LinOp LinOp::with_values(Vector values) const {
  require_dim("LinOp::with_values", dim_, values.size());
  if (std::holds_alternative<Diagonal>(payload_)) return LinOp::diagonal(std::move(values));
  if (const auto* p = std::get_if<Spectral>(&payload_)) return LinOp(dim_, Spectral{std::move(values), p->plan});
  throw InvalidArgument(std::string("with_values() on ") + to_string(kind()) + " operator");
}

const Matrix& LinOp::matrix() const {
  if (const auto* p = std::get_if<Dense>(&payload_)) return p->m;
  throw InvalidArgument(std::string("matrix() on ") + to_string(kind()) + " operator");
}

const Vector& LinOp::diagonal_entries() const {
  if (const auto* p = std::get_if<Diagonal>(&payload_)) return p->d;
  throw InvalidArgument(std::string("diagonal_entries() on ") + to_string(kind()) + " operator");
}

const Vector& LinOp::symbol() const {
  if (const auto* p = std::get_if<Spectral>(&payload_)) return p->symbol;
  throw InvalidArgument(std::string("symbol() on ") + to_string(kind()) + " operator");
}

const std::vector<StencilTap>& LinOp::taps() const {
  if (const auto* p = std::get_if<Stencil>(&payload_)) return p->taps;
  throw InvalidArgument(std::string("taps() on ") + to_string(kind()) + " operator");
}

bool LinOp::periodic() const {
  if (const auto* p = std::get_if<Stencil>(&payload_)) return p->periodic;
  throw InvalidArgument(std::string("periodic() on ") + to_string(kind()) + " operator");
}

const std::vector<LinOp>& LinOp::factors() const {
  if (const auto* p = std::get_if<Composition>(&payload_)) return p->factors;
  throw InvalidArgument(std::string("factors() on ") + to_string(kind()) + " operator");
}

LinOp operator+(const LinOp& a, const LinOp& b) {
  require_dim("LinOp operator+", a.dim(), b.dim());
  if (a.kind() == OpKind::diagonal && b.kind() == OpKind::diagonal)
    return LinOp::diagonal(a.diagonal_entries() + b.diagonal_entries());
  if (a.kind() == OpKind::spectral_multiplier && b.kind() == OpKind::spectral_multiplier)
    return LinOp::spectral_multiplier(a.symbol() + b.symbol());
  return LinOp::dense(a.to_dense() + b.to_dense());
}

LinOp operator-(const LinOp& a, const LinOp& b) { return a + b.scaled(-1.0); }

StateVector apply(const LinOp& op, const StateVector& x) { return op.apply(x); }

LinOp adjoint(const LinOp& op) { return op.adjoint(); }

DissipativityReport is_dissipative(const LinOp& op, std::size_t trials, double tol, std::uint64_t seed) {
  DissipativityReport report;
  if (op.kind() == OpKind::diagonal || op.kind() == OpKind::spectral_multiplier) {
    // Normal operators: the Hermitian part is diagonal in the same basis.
    const Vector& d = op.kind() == OpKind::diagonal ? op.diagonal_entries() : op.symbol();
    Index top = 0;
    const double re_max = d.real().maxCoeff(&top);
    report.max_hermitian_eigenvalue = re_max;
    report.worst_sampled = re_max;
    if (op.kind() == OpKind::diagonal) {
      report.witness = Vector::Unit(op.dim(), top);
    } else {
      const Index n = op.dim();
      report.witness.resize(n);
      for (Index j = 0; j < n; ++j) {
        const double phase = 2.0 * M_PI * static_cast<double>(top * j % n) / static_cast<double>(n);
        report.witness(j) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), phase);
      }
    }
    report.dissipative = re_max <= tol;
    return report;
  }
  const Matrix dense = op.to_dense();
  const Matrix hermitian = (dense + dense.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian);
  const Index top = hermitian.rows() - 1;
  report.max_hermitian_eigenvalue = eig.eigenvalues()(top);
  report.witness = eig.eigenvectors().col(top);

  std::mt19937_64 rng(seed);
  report.worst_sampled = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trials; ++k) {
    const Vector x = random_unit(rng, op.dim());
    const double re = op.apply(x).dot(x).real();
    report.worst_sampled = std::max(report.worst_sampled, re);
  }
  report.dissipative = report.max_hermitian_eigenvalue <= tol && (trials == 0 || report.worst_sampled <= tol);
  return report;
}

DissipativityReport is_dissipative(const SeminormFamily& family, const LinOp& op, std::size_t trials,
                                   double tol, std::uint64_t seed) {
  if (!family.has_inner_product()) {
    throw MissingInnerProduct("dissipativity needs an l2 (inner-product) seminorm in family");
  }
  return is_dissipative(op, trials, tol, seed);
}

namespace {

Vector divide(const Vector& x, const Vector& pivots) {
  Vector y(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    y(i) = pivots(i).imag() == 0.0 ? x(i) / pivots(i).real() : x(i) / pivots(i);
  }
  return y;
}

}  // namespace

Resolvent::Resolvent(const LinOp& op, double s) : op_(op), op_adjoint_(op.adjoint()), s_(s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("resolvent step must be finite and >= 0");
  if (s == 0.0) return;
  switch (op.kind()) {
    case OpKind::diagonal:
    case OpKind::spectral_multiplier: {
      const Vector& d = op.kind() == OpKind::diagonal ? op.diagonal_entries() : op.symbol();
      for (Index i = 0; i < d.size(); ++i) {
        if (std::abs(1.0 - s * d(i)) < 1e-14) throw SingularSystem(s, "zero pivot in mode " + std::to_string(i));
      }
      if (op.kind() == OpKind::diagonal) {
        pivots_ = Vector::Ones(d.size()) - s * d;
        return;
      }
      const Vector inverse = (Vector::Ones(d.size()) - s * d).cwiseInverse();
      direct_ = op.with_values(inverse);
      direct_adjoint_ = op.with_values(inverse.conjugate());
      return;
    }
    default: {
      const Index n = op.dim();
      const Matrix system = Matrix::Identity(n, n) - s * op.to_dense();
      auto lu = std::make_shared<Eigen::PartialPivLU<Matrix>>(system);
      if (!(lu->rcond() > 1e-14)) throw SingularSystem(s, "reciprocal condition " + std::to_string(lu->rcond()));
      lu_ = lu;
      lu_adjoint_ = std::make_shared<Eigen::PartialPivLU<Matrix>>(system.adjoint());
    }
  }
}

void Resolvent::check_residual(const LinOp& op, const Vector& x, const Vector& y) const {
  const Vector residual = y - s_ * op.apply(y) - x;
  const double bound = kResidualTolerance * x.norm();
  if (!(residual.norm() <= bound) && !(x.norm() == 0.0 && residual.norm() == 0.0)) {
    throw SingularSystem(s_, "residual " + std::to_string(residual.norm()) + " exceeds tolerance");
  }
}

Vector Resolvent::solve(const Vector& x) const {
  require_dim("Resolvent::solve", op_.dim(), x.size());
  if (s_ == 0.0) return x;
  const Vector y = pivots_ ? divide(x, *pivots_) : lu_ ? Vector(lu_->solve(x)) : direct_->apply(x);
  check_residual(op_, x, y);
  return y;
}

Vector Resolvent::solve_adjoint(const Vector& x) const {
  require_dim("Resolvent::solve_adjoint", op_.dim(), x.size());
  if (s_ == 0.0) return x;
  const Vector y = pivots_ ? divide(x, pivots_->conjugate())
                   : lu_adjoint_ ? Vector(lu_adjoint_->solve(x))
                                 : direct_adjoint_->apply(x);
  check_residual(op_adjoint_, x, y);
  return y;
}

StateVector resolvent_apply(const LinOp& op, double s, const StateVector& x) {
  return x.with_coords(Resolvent(op, s).solve(x.coords()));
}

Matrix load_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open matrix file " + path.string());
  long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
    throw InvalidArgument(path.string() + ": first line must be \"rows cols\" with positive values");
  }
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      double v = 0.0;
      if (!(in >> v)) {
        throw InvalidArgument(path.string() + ": expected " + std::to_string(rows * cols) + " entries, ran out at " +
                              std::to_string(i * cols + j));
      }
      m(i, j) = v;
    }
  }
  std::string extra;
  if (in >> extra) throw InvalidArgument(path.string() + ": trailing data '" + extra + "'");
  return m;
}

LinOp load_dense_operator(const std::filesystem::path& path) { return LinOp::dense(load_matrix_file(path)); }

}  // namespace ck
