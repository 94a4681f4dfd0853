#include "mgvol/rng.hpp"

#include "mgvol/normal.hpp"

namespace mgvol {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
  hi = std::uint32_t(p >> 32);
  lo = std::uint32_t(p);
}

}  // namespace

std::array<std::uint32_t, 4> CounterRng::philox(std::array<std::uint32_t, 4> ctr,
                                                std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t CounterRng::bits(std::uint64_t index) const {
  const std::array<std::uint32_t, 4> ctr = {std::uint32_t(index), std::uint32_t(index >> 32),
                                            std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key = {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
  const auto out = philox(ctr, key);
  return (std::uint64_t(out[0]) << 32) | std::uint64_t(out[1]);
}

double CounterRng::uniform(std::uint64_t index) const {
  return (double(bits(index) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t index) const { return normal::quantile(uniform(index)); }

}  // namespace mgvol
