#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace flrld {

// All randomness in the library flows through these helpers. std::mt19937_64
// is fully specified by the standard; the distribution helpers are hand-rolled
// because the standard <random> distributions are implementation-defined and
// would break cross-toolchain reproducibility.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mixes two seeds into one; used to derive per-component seeds from a master.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x517cc1b727220a95ULL + (b << 6) + (b >> 2));
  return splitmix64(s);
}

class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform integer in [0, n). Modulo bias is irrelevant at simulation scale.
  std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : eng_() % n; }

  bool next_bool(double p) { return next_unit() < p; }

  // Geometric number of failures before first success, success probability p.
  std::uint32_t next_geometric(double p) {
    std::uint32_t k = 0;
    while (k < 1u << 20 && !next_bool(p)) ++k;
    return k;
  }

 private:
  std::mt19937_64 eng_;
};

// In-place Fisher-Yates shuffle with explicit index draws.
template <typename T>
void deterministic_shuffle(std::span<T> items, DetRng& rng) {
  if (items.size() < 2) return;
  for (std::size_t i = items.size() - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
    using std::swap;
    swap(items[i], items[j]);
  }
}

}  // namespace flrld
