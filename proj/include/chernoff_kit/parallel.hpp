#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace ck {

/// Kernels take a policy; `serial` is the reference path kept for testing.
enum class Exec { serial, parallel };

/// Runs body(i) for i in [0, n). Every index is visited exactly once and results must
/// be stored per index so the reduction order stays fixed regardless of policy.
template <typename Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ck
