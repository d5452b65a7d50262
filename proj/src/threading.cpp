#include "msgfem/common.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace msgfem {

namespace {

int env_thread_cap() {
  const char* env = std::getenv("MSGFEM_THREADS");
  if (env == nullptr) return 0;
  int v = std::atoi(env);
  return v > 0 ? v : 0;
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
#else
  int n = 1;
#endif
  int cap = env_thread_cap();
  if (cap > 0 && cap < n) n = cap;
  return n;
}

void init_threading() {
#ifdef _OPENMP
  int cap = env_thread_cap();
  if (cap > 0 && cap < omp_get_max_threads()) omp_set_num_threads(cap);
#endif
}

}  // namespace msgfem
