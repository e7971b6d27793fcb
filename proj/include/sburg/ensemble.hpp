#pragma once

#include <exception>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sburg {

enum class EnsembleMode { serial, parallel };

#ifdef _OPENMP
inline constexpr EnsembleMode kDefaultEnsembleMode = EnsembleMode::parallel;
#else
inline constexpr EnsembleMode kDefaultEnsembleMode = EnsembleMode::serial;
#endif

/// Run `fn(member)` for member = 0..n-1 and collect the results in member
/// order. Members derive their seeds from their index, so the parallel lane
/// returns bit-identical results to the serial reference; tests and the
/// benchmark compare the two. Exceptions are rethrown after the loop
/// completes (first member wins).
template <class Result, class Fn>
std::vector<Result> ensemble_map(int n, Fn&& fn,
                                 EnsembleMode mode = kDefaultEnsembleMode) {
  std::vector<Result> results(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

#ifdef _OPENMP
  if (mode == EnsembleMode::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) {
      try {
        results[k] = fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (int k = 0; k < n; ++k)
      if (errors[k]) std::rethrow_exception(errors[k]);
    return results;
  }
#else
  (void)mode;
#endif

  for (int k = 0; k < n; ++k) results[k] = fn(k);
  return results;
}

inline int ensemble_thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sburg
