#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace logxlate {

// splitmix64 step; used to derive well-mixed child seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent seed from (seed, stream). Record i of a dataset
// uses mix_seed(profile_seed, i); auxiliary streams use fixed tags.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ stream;
  return splitmix64(s);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t s1,
                              std::uint64_t s2) {
  return mix_seed(mix_seed(seed, s1), s2);
}

// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
// the standard pins down exactly) and does its own bounded sampling, so the
// same seed produces the same draws on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [lo, hi], inclusive. Unbiased (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(bounded(span));
  }

  // Uniform index in [0, n). n must be >= 1.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(bounded(n)); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform_real() < p; }

  template <class Container>
  const auto& pick(const Container& c) {
    return c[index(std::size(c))];
  }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[index(i)]);
    }
  }

 private:
  // Uniform in [0, span); span == 0 means the full 2^64 range.
  std::uint64_t bounded(std::uint64_t span) {
    if (span == 0) return next_u64();
    if ((span & (span - 1)) == 0) return next_u64() & (span - 1);
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % span;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % span;
  }

  std::mt19937_64 engine_;
};

}  // namespace logxlate
