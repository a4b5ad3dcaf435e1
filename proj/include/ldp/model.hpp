#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace ldp {

/// The five admissible jumps, in the canonical order used everywhere
/// (intensity sums, probability vectors, simulation tables).
enum class Jump : std::uint8_t { up1 = 0, up2 = 1, down1 = 2, down2 = 3, joint = 4 };

inline constexpr std::size_t kJumpCount = 5;

struct JumpVector {
  int dz1 = 0;
  int dz2 = 0;

  friend constexpr bool operator==(JumpVector, JumpVector) = default;
};

inline constexpr std::array<Jump, kJumpCount> kAllJumps = {
    Jump::up1, Jump::up2, Jump::down1, Jump::down2, Jump::joint};

constexpr JumpVector jump_vector(Jump j) {
  switch (j) {
    case Jump::up1: return {1, 0};
    case Jump::up2: return {0, 1};
    case Jump::down1: return {-1, 0};
    case Jump::down2: return {0, -1};
    case Jump::joint: return {-1, -1};
  }
  return {};
}

constexpr bool is_up(Jump j) { return j == Jump::up1 || j == Jump::up2; }

/// Classifies a displacement; returns false if it is not one of the five jumps.
bool classify_jump(JumpVector v, Jump& out);

std::string to_string(Jump j);

/// A point of Z^2. The jump process lives in the quadrant; the reference
/// walk may leave it, so the coordinates are signed.
struct LatticeState {
  std::int64_t z1 = 0;
  std::int64_t z2 = 0;

  constexpr bool in_quadrant() const { return z1 >= 0 && z2 >= 0; }
  constexpr LatticeState operator+(JumpVector v) const { return {z1 + v.dz1, z2 + v.dz2}; }
  constexpr JumpVector operator-(LatticeState o) const {
    return {static_cast<int>(z1 - o.z1), static_cast<int>(z2 - o.z2)};
  }
  friend constexpr bool operator==(LatticeState, LatticeState) = default;
};

/// Jump intensities lambda(y) for the five jumps. All must be strictly positive.
class RateParams {
 public:
  RateParams(double up1, double up2, double down1, double down2, double joint);

  static RateParams unit() { return {1.0, 1.0, 1.0, 1.0, 1.0}; }

  double up1() const { return lam_[0]; }
  double up2() const { return lam_[1]; }
  double down1() const { return lam_[2]; }
  double down2() const { return lam_[3]; }
  double joint() const { return lam_[4]; }
  double base(Jump j) const { return lam_[static_cast<std::size_t>(j)]; }

  double c0() const { return c0_; }
  double c1() const { return lam_[2]; }
  double c2() const { return lam_[3]; }
  double c3() const { return lam_[4]; }
  double max_c() const;

  /// Multiplies every intensity by `factor` (> 0).
  RateParams scaled(double factor) const;

 private:
  std::array<double, kJumpCount> lam_;
  double c0_;
};

/// lambda_z(y) from the state-dependent intensity table. The state must lie in the quadrant.
double jump_intensity(const RateParams& params, LatticeState state, Jump jump);

/// h(z) = c0 + c1 z1 + c2 z2 + c3 min{z1, z2}, summed in the order up1, up2, down1, down2, joint
/// so that it is bit-identical to the sum of the five intensities.
double total_rate(const RateParams& params, LatticeState state);

std::array<double, kJumpCount> jump_intensities(const RateParams& params, LatticeState state);

std::array<double, kJumpCount> jump_probabilities(const RateParams& params, LatticeState state);

}  // namespace ldp
