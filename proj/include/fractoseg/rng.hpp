#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fractoseg {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic xoshiro256** generator. Not std::mt19937 so that streams are
/// reproducible bit-for-bit across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    // rejection sampling to stay unbiased
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + int(uniform_index(std::uint64_t(hi - lo + 1)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (no cached spare, keeps streams simple).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

/// Derives an independent stream from (seed, epoch, sample). Weak and strong
/// views of one sample must share geometry but draw independent photometric
/// noise, so both sides derive from the same triple plus a stream tag.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t epoch, std::uint64_t sample,
                      std::uint64_t tag = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = detail::splitmix64(s);
  s = h ^ (epoch * 0x9e3779b97f4a7c15ull);
  h = detail::splitmix64(s);
  s = h ^ (sample * 0xd1b54a32d192ed03ull);
  h = detail::splitmix64(s);
  s = h ^ (tag * 0x2545f4914f6cdd1dull);
  return Rng(detail::splitmix64(s));
}

}  // namespace fractoseg
