#include "germlab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace germlab {

int configure_workers_from_env() {
  const char* env = std::getenv("GERMLAB_THREADS");
  if (env != nullptr && *env != '\0') {
    int n = std::atoi(env);
    if (n > 0) set_worker_count(n);
  }
  return worker_count();
}

void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) {
    omp_set_dynamic(0);
    omp_set_num_threads(n);
  }
#else
  (void)n;
#endif
}

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace germlab
