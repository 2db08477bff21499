#pragma once

#include <array>
#include <cstdint>

namespace asep {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// A stream is identified by (seed, stream_id); the draw index is the counter,
// so any stream can be split off or replayed without shared state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

  std::uint64_t next_u64();
  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Uniform on (0,1], safe for log().
  double uniform_open0() { return 1.0 - uniform(); }
  double exponential(double rate);
  // Uniform integer in [0, n), n > 0 (Lemire's method).
  std::uint64_t below(std::uint64_t n);

  // Independent child stream; children of distinct (parent, index) never collide.
  RngStream split(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  // Philox blocks consumed so far (each block yields two 64-bit words).
  std::uint64_t blocks() const { return counter_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

}  // namespace asep
