#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sanvi {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hashes a master seed together with a list of counters (vertex index,
/// iteration, ...) into a single 64-bit stream key.
constexpr std::uint64_t stream_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(seed);
  for (auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

/// Counter-based generator satisfying UniformRandomBitGenerator. Cheap to
/// construct, so a fresh one can be keyed per (seed, vertex, iteration).
class SubstreamRng {
 public:
  using result_type = std::uint64_t;

  explicit SubstreamRng(std::uint64_t key) noexcept : state_(key) {}
  SubstreamRng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept
      : state_(stream_key(seed, keys)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace sanvi
