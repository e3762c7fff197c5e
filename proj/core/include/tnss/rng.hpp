#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace tnss {

/// SplitMix64 (Steele, Lea, Flood 2014): a 64-bit state advanced by the
/// golden-ratio increment and finalized with the Stafford variant-13 mixer.
/// Used for every seeded choice in the library so that runs reproduce
/// bit-for-bit across platforms and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller on uniform().
  double normal() noexcept;

  std::uint64_t state() const noexcept { return state_; }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Counter-based seed split: the seed for job `index` of stream `stream`
/// depends only on (master, stream, index), never on execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) noexcept {
  return SplitMix64::mix(master ^ SplitMix64::mix(stream + 0x632be59bd9b4e019ULL) ^
                         SplitMix64::mix(index * 0x9e3779b97f4a7c15ULL + 1));
}

/// Fisher-Yates shuffle driven by SplitMix64.
template <typename T>
void shuffle(std::span<T> values, SplitMix64& rng) noexcept {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace tnss
