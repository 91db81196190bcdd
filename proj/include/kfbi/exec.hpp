#pragma once

#include <exception>
#include <mutex>

namespace kfbi {

/// Selects between the OpenMP kernel and a single-threaded run of the same
/// loop. Results are bitwise identical; the serial path exists for tests
/// and benchmarks.
enum class ExecPolicy { serial, parallel };

inline bool is_parallel(ExecPolicy p) { return p == ExecPolicy::parallel; }

/// Static-schedule loop over [0, n). An exception thrown by any iteration is
/// rethrown on the calling thread after the loop (the first one caught).
template <class F>
void parallel_for(long n, ExecPolicy exec, F&& body) {
  std::exception_ptr error;
  std::mutex m;
#pragma omp parallel for if (is_parallel(exec)) schedule(static)
  for (long k = 0; k < n; ++k) {
    try {
      body(k);
    } catch (...) {
      std::lock_guard lock(m);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace kfbi
