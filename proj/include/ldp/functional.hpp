#pragma once

#include <cstddef>

#include "ldp/model.hpp"
#include "ldp/paths.hpp"

namespace ldp {

/// Log-domain sentinel for paths the quadrant process cannot produce.
double minus_infinity();

/// A_T(u) = int_0^T h(u(t)) dt, including the final holding interval up to T.
/// Requires a quadrant path.
double a_functional(const RateParams& params, const StepTrajectory& traj);

/// B_T(u) = sum_i ln lambda_{u(t_i)}(jump_i) + ln h(u(t_N)).
/// minus_infinity() if the path leaves the quadrant or uses a zero-intensity jump.
double b_functional(const RateParams& params, const StepTrajectory& traj);

/// ln of the product-form density of the quadrant process w.r.t. the reference walk,
/// in the convention that carries the terminal factor h(u(t_N)):
///   N ln 5 + sum_i [ln lambda_i - (h_i - 1) tau_{i+1}] + ln h_N - (h_N - 1) tau_{N+1}.
double log_density_wrt_zeta(const RateParams& params, const StepTrajectory& traj);

/// Exact Radon-Nikodym derivative ln(dP_xi/dP_zeta) on [0, T]:
///   T - A_T + N ln 5 + sum_i ln lambda_i.
/// It differs from log_density_wrt_zeta by the terminal term ln h(u(t_N)).
double log_likelihood_ratio_wrt_zeta(const RateParams& params, const StepTrajectory& traj);

struct PathFunctionals {
  double a_value = 0.0;
  double b_value = 0.0;
  std::size_t n_jumps = 0;
  double log_density = 0.0;
};

/// For a path leaving the quadrant a_value is NaN (h is undefined there).
PathFunctionals path_functionals(const RateParams& params, const StepTrajectory& traj);

struct LemmaBound {
  bool holds = false;
  double lhs = 0.0;  // B_T
  double rhs = 0.0;  // K+ ln c0 + (K- + 1) ln(T (c0 + max c_i (sup f + eps)))
};

/// Checks the explicit bound on B_T for a path inside the tube U_eps(target).
/// Throws std::invalid_argument if the scaled path is not in the tube.
LemmaBound lemma_bt_bound_check(const RateParams& params, const StepTrajectory& traj,
                                const PiecewiseLinearPath& target, double epsilon);

}  // namespace ldp
