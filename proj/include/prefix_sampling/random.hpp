#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace prefix_sampling {

/// Purpose tags keep the random streams of different consumers disjoint.
enum class Stream : std::uint64_t {
  Population = 1,
  TaskSelection = 2,
  FreshRollout = 3,
  Rerollout = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a run seed and a coordinate tuple into one 64-bit stream seed.
/// Streams keyed by (step, task, rollout) make sampling independent of the
/// order in which groups are generated.
inline std::uint64_t stream_seed(std::uint64_t seed, Stream purpose,
                                 std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(purpose)));
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, Stream purpose,
                    std::initializer_list<std::uint64_t> coords) {
  return Rng(stream_seed(seed, purpose, coords));
}

/// Uniform draw in [0, 1) with 53 bits of resolution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace prefix_sampling
