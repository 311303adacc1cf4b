#pragma once

#include <cstddef>
#include <exception>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tfm {

/// How a statistical kernel runs. jobs == 1 selects the serial reference
/// loop; jobs == 0 lets OpenMP pick; jobs > 1 pins the team size. Results
/// are identical in every mode: each index derives its own RNG stream and
/// writes its own output slot.
struct ExecPolicy {
  int jobs = 0;

  static ExecPolicy serial() { return ExecPolicy{1}; }
  static ExecPolicy parallel(int jobs = 0) { return ExecPolicy{jobs}; }
  bool is_serial() const { return jobs == 1; }
};

/// Index-parallel kernel: body(i) for i in [0, count). The serial reference
/// implementation is the plain loop below; the OpenMP path must produce
/// bit-identical outputs (benchmarked and asserted in tests).
template <class Body>
void for_each_index(std::size_t count, const ExecPolicy& exec, Body&& body) {
#ifdef _OPENMP
  if (!exec.is_serial()) {
    std::exception_ptr first_error = nullptr;
    const int requested = exec.jobs > 0 ? exec.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(requested)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(tfm_for_each_index_error)
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
  }
#endif
  for (std::size_t i = 0; i < count; ++i) {
    body(i);
  }
}

}  // namespace tfm
