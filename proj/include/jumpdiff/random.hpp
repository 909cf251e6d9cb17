#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (seed, substream address, draw index), so a
// path can be regenerated in isolation and paths can be farmed out to any
// number of threads without changing a single bit of output.

#include <array>
#include <cstdint>

namespace jumpdiff {

using Counter4 = std::array<std::uint32_t, 4>;
using Key2 = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds.
Counter4 philox4x32(Counter4 ctr, Key2 key) noexcept;

// What a substream is used for. Distinct purposes never share counters.
enum class Purpose : std::uint32_t {
  diffusion = 1,
  jump_count = 2,
  jump_size = 3,
  up_count = 4,
  up_size = 5,
  down_count = 6,
  down_size = 7,
  kou_sample = 8,
  gibbs = 9,
};

// Address of an independent substream: one per (path, step, purpose).
struct StreamId {
  std::uint64_t path = 0;
  std::uint32_t step = 0;
  Purpose purpose = Purpose::diffusion;
};

// Sequential uniform generator over one substream. Counter layout:
// word 0 = block index, word 1 = step, word 2 = path, word 3 = purpose.
// The top 32 bits of the path index are folded into word 3.
class Stream {
 public:
  Stream(std::uint64_t seed, StreamId id) noexcept;

  // Raw 64 bits.
  std::uint64_t next_u64() noexcept;
  // Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() noexcept;
  // Standard normal via Box-Muller (cosine branch only, two uniforms per draw).
  double normal() noexcept;
  // Exponential with unit rate.
  double exponential() noexcept;
  // Poisson(mean). Inversion below 30 (monotone in `mean` for a fixed stream
  // position, which the common-random-number surfaces rely on), PTRS above.
  std::uint32_t poisson(double mean) noexcept;
  // Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape) noexcept;

 private:
  void refill() noexcept;

  Key2 key_;
  Counter4 base_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace jumpdiff
