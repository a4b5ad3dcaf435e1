#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ldp {

/// Philox4x32-10 block function (Salmon et al., counter-based).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Stream keyed by (master_seed, replica_index). The master seed is the Philox key,
/// the replica index fills the upper half of the counter and the draw index the
/// lower half, so any replica can be regenerated without touching the others.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t replica_index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Exponential with the given rate (> 0).
  double exponential(double rate);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t replica_index() const { return replica_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t replica_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

/// Derives an independent master seed for a named sub-experiment (SplitMix64 finaliser).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag);

}  // namespace ldp
