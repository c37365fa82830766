#include "clusterfdr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "clusterfdr/error.hpp"

namespace clusterfdr {

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : state_(master_seed ^ ((stream_index + 1) * kStreamMix)),
      master_seed_(master_seed),
      stream_index_(stream_index) {
  next_u64();
}

RngStream RngStream::from_state(std::uint64_t state) {
  RngStream s;
  s.state_ = state;
  return s;
}

double RngStream::next_open_unit() noexcept {
  constexpr double kUnit = 0x1.0p-53;
  const double u = static_cast<double>(next_u64() >> 11) * kUnit;
  return std::max(u, kUnit);
}

double RngStream::next_standard_normal() noexcept {
  const double u1 = next_open_unit();
  const double u2 = next_open_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return RngStream(master_seed, index).next_u64();
}

std::vector<std::int8_t> sign_vector(std::uint64_t master_seed, std::uint64_t realization_index,
                                     std::size_t n) {
  if (realization_index == 0) {
    throw Error(ErrorKind::InvalidArgument, "realization index 0 is reserved for the observed labeling");
  }
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "sign vector needs N >= 2");
  RngStream stream(master_seed, realization_index);
  std::vector<std::int8_t> signs(n);
  for (auto& s : signs) s = (stream.next_u64() & 1U) == 0 ? 1 : -1;
  return signs;
}

}  // namespace clusterfdr
