#ifndef DIDFORGE_PARALLEL_HPP
#define DIDFORGE_PARALLEL_HPP

namespace didforge {

// Number of OpenMP threads the hot loops may use.  DIDFORGE_THREADS caps the
// OpenMP default; 1 when built without OpenMP.
int max_threads();

// Resolve a requested thread count: 0 means "use max_threads()".
int resolve_threads(int requested);

}  // namespace didforge

#endif
