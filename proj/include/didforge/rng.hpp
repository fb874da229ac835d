#ifndef DIDFORGE_RNG_HPP
#define DIDFORGE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace didforge {

// Counter-based pseudo-random numbers.  Every draw is a pure function of
// (seed, stream, counter), so generation order never matters: parallel and
// serial code paths produce identical values, and replicate b of a bootstrap
// can be computed on any thread.  The mixer is splitmix64 applied to the
// combined key.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t counter) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ stream);
  return splitmix64(h ^ counter);
}

// Uniform on (0,1]; never returns 0 so it is safe under log().
inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t counter) {
  return static_cast<double>((mix(seed, stream, counter) >> 11) + 1) *
         0x1.0p-53;
}

// Standard normal via Box-Muller.  Consumes a fixed pair of counters per
// draw, which keeps streams aligned regardless of how many draws a caller
// skips.
inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t counter) {
  const double u1 = uniform(seed, stream, 2 * counter);
  const double u2 = uniform(seed, stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline double rademacher(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t counter) {
  return (mix(seed, stream, counter) & 1ULL) ? 1.0 : -1.0;
}

}  // namespace rng
}  // namespace didforge

#endif
