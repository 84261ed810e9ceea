#pragma once

#include "chernoff_kit/state.hpp"

namespace ck {

/// Matrix exponential by scaling and squaring with a diagonal Pade approximant of degree
/// 3, 5, 7, 9 or 13, chosen from the 1-norm of the argument.
Matrix expm(const Matrix& a);

}  // namespace ck
