#pragma once

#include <array>
#include <cstdint>

namespace detfield {

// Philox4x32-10 counter-based generator. A stream is identified by (seed, stream_id);
// two streams never share a counter block, so task i of a parallel loop draws the same
// numbers no matter which thread runs it.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  double uniform();      // in (0, 1), never 0 or 1
  double normal();       // standard normal, Box-Muller
  double gamma(double shape);  // Gamma(shape, 1), Marsaglia-Tsang

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> out_{};
  int used_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

}  // namespace detfield
