#include "ldp/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace ldp {

namespace {

constexpr std::int64_t kCoordinateLimit = std::int64_t{1} << 32;

void check_state(LatticeState s) {
  if (!s.in_quadrant()) {
    throw std::invalid_argument("lattice state outside the quadrant");
  }
  assert(s.z1 < kCoordinateLimit && s.z2 < kCoordinateLimit);
}

}  // namespace

bool classify_jump(JumpVector v, Jump& out) {
  for (Jump j : kAllJumps) {
    if (jump_vector(j) == v) {
      out = j;
      return true;
    }
  }
  return false;
}

std::string to_string(Jump j) {
  switch (j) {
    case Jump::up1: return "(1,0)";
    case Jump::up2: return "(0,1)";
    case Jump::down1: return "(-1,0)";
    case Jump::down2: return "(0,-1)";
    case Jump::joint: return "(-1,-1)";
  }
  return "?";
}

RateParams::RateParams(double up1, double up2, double down1, double down2, double joint)
    : lam_{up1, up2, down1, down2, joint}, c0_(up1 + up2) {
  static constexpr const char* kNames[] = {"lambda_up1", "lambda_up2", "lambda_down1",
                                           "lambda_down2", "lambda_joint"};
  for (std::size_t i = 0; i < kJumpCount; ++i) {
    if (!(lam_[i] > 0.0) || !std::isfinite(lam_[i])) {
      throw std::invalid_argument(std::string("rate ") + kNames[i] +
                                  " must be a positive finite number");
    }
  }
}

double RateParams::max_c() const { return std::max({c1(), c2(), c3()}); }

RateParams RateParams::scaled(double factor) const {
  return {lam_[0] * factor, lam_[1] * factor, lam_[2] * factor, lam_[3] * factor,
          lam_[4] * factor};
}

double jump_intensity(const RateParams& params, LatticeState state, Jump jump) {
  check_state(state);
  switch (jump) {
    case Jump::up1: return params.up1();
    case Jump::up2: return params.up2();
    case Jump::down1: return static_cast<double>(state.z1) * params.down1();
    case Jump::down2: return static_cast<double>(state.z2) * params.down2();
    case Jump::joint:
      return static_cast<double>(std::min(state.z1, state.z2)) * params.joint();
  }
  return 0.0;
}

std::array<double, kJumpCount> jump_intensities(const RateParams& params, LatticeState state) {
  std::array<double, kJumpCount> out{};
  for (Jump j : kAllJumps) {
    out[static_cast<std::size_t>(j)] = jump_intensity(params, state, j);
  }
  return out;
}

double total_rate(const RateParams& params, LatticeState state) {
  const auto lam = jump_intensities(params, state);
  double h = 0.0;
  for (double l : lam) h += l;
  return h;
}

std::array<double, kJumpCount> jump_probabilities(const RateParams& params, LatticeState state) {
  auto p = jump_intensities(params, state);
  double h = 0.0;
  for (double l : p) h += l;
  for (double& v : p) v /= h;
  return p;
}

}  // namespace ldp
