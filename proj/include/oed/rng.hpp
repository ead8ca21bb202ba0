#pragma once

#include <cstdint>

namespace oed {

/// Counter-based SplitMix64 stream.
///
/// The i-th output is mix64(seed + (i + 1) * golden_gamma), so a stream is
/// fully described by (seed, counter) and is bit-identical on every platform.
/// Independent child streams are derived with split(index).
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;

  /// Child stream for a trial or sub-task; does not advance this stream.
  [[nodiscard]] RngStream split(std::uint64_t index) const noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t mix64(std::uint64_t z) noexcept;

private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

} // namespace oed
