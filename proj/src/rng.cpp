#include "oed/rng.hpp"

namespace oed {

std::uint64_t RngStream::mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(seed_ + counter_ * kGamma);
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform();
}

RngStream RngStream::split(std::uint64_t index) const noexcept {
  // Two rounds of mixing decorrelate children of adjacent indices.
  return RngStream(mix64(mix64(seed_ ^ 0x6A09E667F3BCC909ULL) + index * kGamma));
}

} // namespace oed
