#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace fogcache {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (stream, index) under a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(master) ^ stream) + index);
}

// Well-known stream identifiers, so that e.g. the request trace does not depend
// on which policy consumes exploration randomness.
namespace stream {
inline constexpr std::uint64_t kPopularity = 0x706f70;
inline constexpr std::uint64_t kPlacement = 0x706c63;
inline constexpr std::uint64_t kRequests = 0x726571;
inline constexpr std::uint64_t kAgent = 0x616774;
inline constexpr std::uint64_t kInit = 0x696e69;
inline constexpr std::uint64_t kCompress = 0x636d70;
inline constexpr std::uint64_t kNoise = 0x6e6f69;
inline constexpr std::uint64_t kInstance = 0x696e73;
}  // namespace stream

/// Deterministic random source.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// derives doubles, bounded integers and normals itself, so sequences are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n), unbiased. n must be positive.
  std::size_t below(std::size_t n);

  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fogcache
