#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>
#include <utility>
#include <string_view>

namespace negev {

/// splitmix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over a byte string. Used to fold image ids into stream seeds;
/// std::hash is implementation-defined and would break cross-build
/// reproducibility.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic xoshiro256++ stream. All randomness in the project flows
/// through this type so that runs are bit-reproducible across standard
/// library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    // Expand the seed with splitmix64 as recommended by the xoshiro authors.
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x = mix64(x);
      word = x | 1ULL;  // keep the state away from all-zero
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, bound) via rejection sampling.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller; caches the spare deviate.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));  // 1-u1 in (0,1]
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Derives an independent stream from a global seed, a tag string and two
/// integer coordinates. Distinct tuples give statistically independent
/// streams; the same tuple always gives the same stream.
inline RngStream derive_stream(std::uint64_t global_seed, std::string_view tag,
                               std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = mix64(global_seed ^ fnv1a64(tag));
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  return RngStream(s);
}

/// Fisher-Yates shuffle driven by an RngStream (std::shuffle ordering is
/// implementation-defined).
template <typename T>
void shuffle(std::vector<T>& items, RngStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace negev
