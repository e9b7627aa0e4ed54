#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace propproc::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent random-number sub-streams, one per (seed, replicate, unit,
// purpose). Changing n or the replicate index leaves every other unit's
// draws untouched, and the treatment stream never shares state with the
// outcome-noise stream.
enum class Purpose : std::uint64_t {
  Trajectory = 1,
  Baseline = 2,
  Treatment = 3,
  Visits = 4,
  Measurement = 5,
  Outcome = 6,
  Generic = 7,
};

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t replicate,
                                 std::uint64_t unit, Purpose purpose) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (0x9E3779B97F4A7C15ull * (replicate + 1)));
  s = splitmix64(s ^ (0xC2B2AE3D27D4EB4Full * (unit + 1)));
  s = splitmix64(s ^ (0x165667B19E3779F9ull * static_cast<std::uint64_t>(purpose)));
  return std::mt19937_64(s);
}

// Uniform on [0, 1), 53-bit resolution.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Box-Muller; consumes two uniforms per call so the stream layout does not
// depend on caller history.
inline double normal(std::mt19937_64& g) {
  const double u1 = 1.0 - uniform01(g);  // (0, 1]
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double normal(std::mt19937_64& g, double mean, double sd) {
  return mean + sd * normal(g);
}

inline double exponential(std::mt19937_64& g, double rate) {
  return -std::log1p(-uniform01(g)) / rate;
}

// Uniform integer in [lo, hi] without std::uniform_int_distribution (whose
// output is implementation-defined).
inline long uniform_int(std::mt19937_64& g, long lo, long hi) {
  const double span = static_cast<double>(hi - lo) + 1.0;
  long v = lo + static_cast<long>(uniform01(g) * span);
  return v > hi ? hi : v;
}

}  // namespace propproc::rng
