#pragma once

#include <cmath>
#include <cstdint>

namespace giro {

/// Finalizer-style 64-bit mixer (splitmix64 constants: Vigna / Stafford mix13).
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t splitmix64_next(std::uint64_t& x) noexcept {
  x += kGoldenGamma;
  return mix64(x);
}

inline constexpr std::uint64_t rotl(std::uint64_t v, int k) noexcept {
  return (v << k) | (v >> (64 - k));
}

}  // namespace detail

/// Deterministic random stream: xoshiro256++ state expanded via splitmix64
/// from a key mixed over (master seed, run index, usage tag). Identical
/// (master, run, tag) triples reproduce identical draw sequences regardless
/// of process or thread schedule. Single-owner: never share one stream
/// between concurrent tasks.
class RngStream {
 public:
  RngStream() : RngStream(0, 0, 0) {}

  RngStream(std::uint64_t master, std::uint64_t run, std::uint64_t tag) {
    std::uint64_t key = mix64(master + detail::kGoldenGamma);
    key = mix64(key + detail::kGoldenGamma * (run + 1));
    key = mix64(key + detail::kGoldenGamma * (tag + 1));
    do {
      for (auto& word : state_) word = detail::splitmix64_next(key);
    } while ((state_[0] | state_[1] | state_[2] | state_[3]) == 0);
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() noexcept { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Unbiased integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via the polar method.
  double normal() noexcept {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

 private:
  std::uint64_t state_[4];
};

/// Derives the stream for (run, tag) under a master seed.
inline RngStream split_seed(std::uint64_t master, std::uint64_t run,
                            std::uint64_t tag) {
  return RngStream(master, run, tag);
}

}  // namespace giro
