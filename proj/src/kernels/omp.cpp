#include <exception>

#include "ergokit/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ergokit::kernels::omp {

namespace {

// Exceptions may not cross an OpenMP region; the first one is captured and
// rethrown after the loop.
template <typename Out, typename Task>
void parallel_fill(std::span<Out> out, const Task& task) {
  const auto n = static_cast<long long>(out.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 64)
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = task(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(ergokit_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void run_paths(std::span<PathOutcome> out, const PathTask& task) { parallel_fill(out, task); }

void run_points(std::span<double> out, const PointTask& task) { parallel_fill(out, task); }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ergokit::kernels::omp
