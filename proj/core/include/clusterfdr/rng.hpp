#pragma once

#include <cstdint>
#include <vector>

namespace clusterfdr {

// SplitMix64 stream keyed by (master_seed, stream_index). The output
// sequence is bit-exact across platforms and a pure function of the key.
class RngStream {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamMix = 0xA0761D6478BD642FULL;

  // state = seed ^ ((index + 1) * kStreamMix), then one discarded step.
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  // Raw SplitMix64 generator started at `state` (no stream mixing).
  static RngStream from_state(std::uint64_t state);

  std::uint64_t next_u64() noexcept {
    state_ += kGamma;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1): 53-bit mantissa, clamped below at 2^-53.
  double next_open_unit() noexcept;

  // Box-Muller; the second variate of each pair is discarded.
  double next_standard_normal() noexcept;

  std::uint64_t state() const noexcept { return state_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

 private:
  RngStream() = default;

  std::uint64_t state_ = 0;
  std::uint64_t master_seed_ = 0;
  std::uint64_t stream_index_ = 0;
};

// First output of stream (master_seed, index); used to derive child seeds.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

// Sign vector for one sign-flip realization. Index 0 is the observed
// labeling and is rejected. sign j = +1 iff bit 0 of the j-th draw is 0.
std::vector<std::int8_t> sign_vector(std::uint64_t master_seed, std::uint64_t realization_index,
                                     std::size_t n);

}  // namespace clusterfdr
