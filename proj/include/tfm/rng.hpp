#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tfm {

// All randomness flows from one base seed through named streams. Stream
// seeds are derived by hashing (base, stream name, index) so that a worker
// processing sample i draws exactly the same numbers regardless of how the
// sample loop is scheduled across threads.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t stream_seed(std::uint64_t base, std::string_view stream,
                                 std::uint64_t index) {
  return splitmix64(splitmix64(base ^ fnv1a64(stream)) ^ index);
}

/// Deterministic generator with a portable uniform; mt19937_64 output is
/// fully specified by the standard, and we avoid std:: distributions whose
/// algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

 private:
  std::mt19937_64 gen_;
};

inline constexpr std::uint64_t kDefaultBaseSeed = 0x5EED;

}  // namespace tfm
