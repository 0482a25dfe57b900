#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace spad {

/// `#pragma omp parallel for` over [0, n) that carries the first exception
/// thrown by `body` out of the parallel region.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr failure;
  std::mutex guard;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Caps the OpenMP team size; 0 leaves the runtime default.
inline void set_jobs(int jobs) {
  if (jobs > 0) omp_set_num_threads(jobs);
}

}  // namespace spad
