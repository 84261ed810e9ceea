#include "chernoff_kit/expm.hpp"

#include <array>
#include <cmath>

namespace ck {

namespace {

// Backward-error thresholds on ||A||_1 for double precision.
constexpr std::array<double, 5> kTheta = {1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                                          2.097847961257068e0, 5.371920351148152e0};

double norm1(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

// Fills U (odd part) and V (even part) so that exp(A) ~ (V - U)^{-1} (V + U).
void pade_low(const Matrix& a, int degree, Matrix& u, Matrix& v) {
  static const double b3[] = {120., 60., 12., 1.};
  static const double b5[] = {30240., 15120., 3360., 420., 30., 1.};
  static const double b7[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  static const double b9[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                              2162160.,     110880.,     3960.,       90.,        1.};
  const double* b = degree == 3 ? b3 : degree == 5 ? b5 : degree == 7 ? b7 : b9;
  const Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  Matrix power = id;
  Matrix odd = b[1] * id;
  Matrix even = b[0] * id;
  for (int k = 2; k <= degree; k += 2) {
    power = power * a2;
    odd += b[k + 1] * power;
    even += b[k] * power;
  }
  u = a * odd;
  v = even;
}

void pade13(const Matrix& a, Matrix& u, Matrix& v) {
  static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
                             129060195264000.,   10559470521600.,    670442572800.,    33522128640.,
                             1323241920.,        40840800.,          960960.,          16380.,
                             182.,               1.};
  const Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix inner_u = b[13] * a6 + b[11] * a4 + b[9] * a2;
  const Matrix inner_v = b[12] * a6 + b[10] * a4 + b[8] * a2;
  u = a * (a6 * inner_u + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = a6 * inner_v + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace

Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("expm of a non-square matrix");
  const Index n = a.rows();
  if (n == 0) return a;
  const double norm = norm1(a);
  if (!std::isfinite(norm)) throw NonFiniteValue("expm: non-finite argument");

  Matrix u, v;
  static constexpr int kLowDegrees[] = {3, 5, 7, 9};
  for (int i = 0; i < 4; ++i) {
    if (norm <= kTheta[static_cast<std::size_t>(i)]) {
      pade_low(a, kLowDegrees[i], u, v);
      return (v - u).partialPivLu().solve(v + u);
    }
  }

  int squarings = 0;
  if (norm > kTheta[4]) squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta[4])));
  const Matrix scaled = a / std::ldexp(1.0, squarings);
  pade13(scaled, u, v);
  Matrix result = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

}  // namespace ck
