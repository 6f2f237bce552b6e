#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace forensics {

// splitmix64, used to derive well-separated engine seeds from (seed, stream)
// pairs so that per-precinct / per-replicate draws do not depend on the order
// in which other streams are consumed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::mt19937_64 sub_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64{splitmix64(splitmix64(seed) ^ splitmix64(~stream))};
}

// Round half to even, then floor at zero. Used for every continuous->count
// conversion in the simulator.
inline std::int64_t round_count(double x) {
  if (x <= 0.0) return 0;
  double r = std::nearbyint(x);  // default FE_TONEAREST rounds half to even
  return static_cast<std::int64_t>(r);
}

}  // namespace forensics
