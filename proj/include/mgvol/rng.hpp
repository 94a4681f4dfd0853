#pragma once

#include <array>
#include <cstdint>

namespace mgvol {

/// Philox4x32-10 counter-based generator. Every variate is a pure function of
/// (seed, stream, index), so streams can be split across workers and results
/// do not depend on evaluation order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  /// Uniform variate in the open interval (0, 1).
  double uniform(std::uint64_t index) const;
  /// Standard normal variate by inverse cdf.
  double normal(std::uint64_t index) const;
  /// Raw 64-bit output.
  std::uint64_t bits(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace mgvol
