#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace germlab {

/// Execution policy for the data-parallel kernels. Results are required to be
/// byte-identical under either policy and any worker count: kernels write
/// independent slots and all reductions run serially in index order.
enum class ExecPolicy { Serial, Parallel };

/// Applies GERMLAB_THREADS (if set) to the OpenMP runtime. Returns the count.
int configure_workers_from_env();

void set_worker_count(int n);
int worker_count();

template <class Fn>
void par_for(std::size_t n, ExecPolicy policy, Fn&& fn) {
  if (policy == ExecPolicy::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) fn(static_cast<std::size_t>(i));
    return;
#endif
  }
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace germlab
