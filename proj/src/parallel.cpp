#include "didforge/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace didforge {

int max_threads() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("DIDFORGE_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (...) {
      // ignore malformed values, keep the OpenMP default
    }
  }
  return std::max(1, n);
}

int resolve_threads(int requested) {
  return requested <= 0 ? max_threads() : requested;
}

}  // namespace didforge
