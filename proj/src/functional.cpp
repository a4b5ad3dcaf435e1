#include "ldp/functional.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldp {

namespace {

const double kLn5 = std::log(5.0);

bool all_in_quadrant(const StepTrajectory& traj) {
  for (const auto& z : traj.states()) {
    if (!z.in_quadrant()) return false;
  }
  return true;
}

// sum_i ln lambda_{u(t_i)}(jump_i); minus infinity on an impossible jump.
double log_jump_intensities(const RateParams& params, const StepTrajectory& traj) {
  double s = 0.0;
  for (std::size_t i = 0; i < traj.jump_count(); ++i) {
    Jump j;
    if (!classify_jump(traj.jump(i), j)) throw std::invalid_argument("illegal jump");
    const double lam = jump_intensity(params, traj.states()[i], j);
    if (!(lam > 0.0)) return minus_infinity();
    s += std::log(lam);
  }
  return s;
}

}  // namespace

double minus_infinity() { return -std::numeric_limits<double>::infinity(); }

double a_functional(const RateParams& params, const StepTrajectory& traj) {
  double a = 0.0;
  const auto& states = traj.states();
  for (std::size_t k = 0; k < states.size(); ++k) {
    a += total_rate(params, states[k]) * traj.holding_time(k);
  }
  return a;
}

double b_functional(const RateParams& params, const StepTrajectory& traj) {
  if (!all_in_quadrant(traj)) return minus_infinity();
  const double s = log_jump_intensities(params, traj);
  if (s == minus_infinity()) return s;
  return s + std::log(total_rate(params, traj.final_state()));
}

double log_density_wrt_zeta(const RateParams& params, const StepTrajectory& traj) {
  if (!all_in_quadrant(traj)) return minus_infinity();
  const auto& states = traj.states();
  const std::size_t n = traj.jump_count();
  double s = static_cast<double>(n) * kLn5;
  for (std::size_t i = 0; i < n; ++i) {
    Jump j;
    if (!classify_jump(traj.jump(i), j)) throw std::invalid_argument("illegal jump");
    const double lam = jump_intensity(params, states[i], j);
    if (!(lam > 0.0)) return minus_infinity();
    s += -(total_rate(params, states[i]) - 1.0) * traj.holding_time(i) + std::log(lam);
  }
  const double hn = total_rate(params, states[n]);
  s += std::log(hn) - (hn - 1.0) * traj.holding_time(n);
  return s;
}

double log_likelihood_ratio_wrt_zeta(const RateParams& params, const StepTrajectory& traj) {
  if (!all_in_quadrant(traj)) return minus_infinity();
  const double s = log_jump_intensities(params, traj);
  if (s == minus_infinity()) return s;
  return traj.horizon() - a_functional(params, traj) +
         static_cast<double>(traj.jump_count()) * kLn5 + s;
}

PathFunctionals path_functionals(const RateParams& params, const StepTrajectory& traj) {
  PathFunctionals out;
  out.n_jumps = traj.jump_count();
  if (!all_in_quadrant(traj)) {
    out.a_value = std::numeric_limits<double>::quiet_NaN();
    out.b_value = minus_infinity();
    out.log_density = minus_infinity();
    return out;
  }
  out.a_value = a_functional(params, traj);
  out.b_value = b_functional(params, traj);
  out.log_density = log_density_wrt_zeta(params, traj);
  return out;
}

LemmaBound lemma_bt_bound_check(const RateParams& params, const StepTrajectory& traj,
                                const PiecewiseLinearPath& target, double epsilon) {
  if (!in_event(traj, EventSpec::tube(target, epsilon))) {
    throw std::invalid_argument("Lemma bound requires a path inside the tube");
  }
  const auto counts = count_up_down(traj);
  const double T = traj.horizon();
  const double per_down =
      std::log(T * (params.c0() + params.max_c() * (target.sup_max() + epsilon)));
  LemmaBound out;
  out.lhs = b_functional(params, traj);
  out.rhs = static_cast<double>(counts.k_plus) * std::log(params.c0()) +
            static_cast<double>(counts.k_minus + 1) * per_down;
  out.holds = out.lhs <= out.rhs;
  return out;
}

}  // namespace ldp
