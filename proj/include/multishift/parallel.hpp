#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace multishift {

/// Execution policy for the per-index kernels. `Serial` is the reference
/// path; `Parallel` distributes indices over OpenMP threads. Both write
/// per-index results and reduce sequentially afterwards, so they agree
/// bit-for-bit.
enum class Exec { Serial, Parallel };

/// Sets the OpenMP thread count used by `Exec::Parallel` kernels.
/// `threads <= 0` leaves the runtime default in place.
void set_threads(int threads);
int max_threads();

namespace detail {

// Runs body(i) for i in [0, count). Exceptions are captured per index and
// the one with the lowest index is rethrown, independent of scheduling.
template <typename Body>
void for_each_index(std::size_t count, Exec exec, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const long n = static_cast<long>(count);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (long i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail
}  // namespace multishift
