#pragma once

#include <cstdint>

#include "pascalsim/common.hpp"

namespace pascalsim {

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: output i is mix64(key + i * golden). Streams are
/// addressed by key, so a draw depends only on (key, position) and never on
/// how many numbers other streams consumed.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  /// Independent child stream; same (parent, id) always yields the same child.
  CounterRng substream(std::uint64_t id) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  /// Circular complex Gaussian with E|z|^2 = variance.
  cplx complex_normal(double variance) noexcept;
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  struct KeyTag {};
  CounterRng(std::uint64_t key, KeyTag) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pascalsim
