#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace avf {

/// Deterministic xoshiro256** generator, state seeded from a single 64-bit
/// seed through splitmix64. Every derived quantity (uniforms, normals,
/// shuffles) is computed here rather than through <random> distributions so
/// streams are identical across standard libraries and platforms.
///
/// Test vectors (first outputs of next_u64()):
///   seed 0  -> 0x99ec5f36cb75f2b4, 0xbf6e1f784956452a
///   seed 42 -> 0x15780b2e0c2ec716, 0x6104d9866d113a7e
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept;
  /// Standard normal via Box-Muller (one draw per call, second value cached).
  double normal() noexcept;
  /// Uniform integer in [0, n). n must be >= 1.
  std::uint64_t below(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Independent child stream; advances this generator by one draw.
  Rng split() noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace avf
