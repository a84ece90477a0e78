#include "ami/core/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ami {

void configure_threads_from_env() {
  const char* v = std::getenv("AMI_THREADS");
  if (v == nullptr) return;
  char* end = nullptr;
  long n = std::strtol(v, &end, 10);
  if (end == v || n < 1) return;
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

bool in_parallel() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return false;
#endif
}

}  // namespace ami
