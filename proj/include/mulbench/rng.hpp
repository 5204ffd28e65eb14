#pragma once

#include <cstdint>
#include <string_view>

namespace mulbench {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937 because the
// algorithm is a published constant sequence: the same seed reproduces the
// same stream on every platform and standard library. split() derives an
// independent stream, so dataset sections can be generated out of order
// without perturbing each other.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, bound) via rejection sampling.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) return 0;
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

  // Integer in [lo, hi] inclusive.
  std::int64_t next_range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Derives an independent child stream keyed by a label, e.g. "hds.rc".
  SplitMix64 split(std::string_view label) const {
    std::uint64_t h = state_ ^ 0x6A09E667F3BCC909ULL;
    for (char c : label) {
      h ^= static_cast<std::uint8_t>(c);
      h *= 0x100000001B3ULL;
    }
    SplitMix64 child(h);
    child.next_u64();
    return child;
  }

 private:
  std::uint64_t state_;
};

}  // namespace mulbench
