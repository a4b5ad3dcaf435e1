#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ldp/model.hpp"

namespace ldp {

struct Breakpoint {
  double t = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
};

struct PathValue {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Continuous piecewise-linear pair of functions on [0, 1] given by breakpoints.
/// Construction only requires a non-empty list; target-class membership is
/// checked separately by validate_target.
class PiecewiseLinearPath {
 public:
  explicit PiecewiseLinearPath(std::vector<Breakpoint> breakpoints);

  /// t -> (t, t).
  static PiecewiseLinearPath diagonal();

  const std::vector<Breakpoint>& breakpoints() const { return bp_; }
  std::size_t segment_count() const { return bp_.size() - 1; }

  /// Linear interpolation; requires an ordered time grid covering t.
  PathValue value(double t) const;

  /// sup_t max{f1(t), f2(t)}; attained at a breakpoint.
  double sup_max() const;

  /// Throws std::invalid_argument unless times are strictly increasing from 0 to 1.
  void require_time_grid() const;

 private:
  std::vector<Breakpoint> bp_;
};

enum class TargetViolation { initial_point, positivity, time_ordering, terminal_time };

struct TargetReport {
  TargetViolation violation;
  std::string message;
};

std::string to_string(TargetViolation v);

/// Checks f(0) = (0,0), positivity for t > 0, ordered times ending at 1.
/// Returns the first violated condition, or nullopt when the target is admissible.
std::optional<TargetReport> validate_target(const PiecewiseLinearPath& path);

/// Piecewise-constant lattice path on [0, T]. states[k] holds on [jump_times[k-1], jump_times[k]).
class StepTrajectory {
 public:
  StepTrajectory() = default;
  StepTrajectory(double horizon, LatticeState initial);

  double horizon() const { return horizon_; }
  std::size_t jump_count() const { return times_.size(); }
  const std::vector<double>& jump_times() const { return times_; }
  const std::vector<LatticeState>& states() const { return states_; }
  LatticeState initial_state() const { return states_.front(); }
  LatticeState final_state() const { return states_.back(); }

  /// Displacement of jump i (0-based).
  JumpVector jump(std::size_t i) const { return states_[i + 1] - states_[i]; }
  /// Holding interval of states[k]; the last runs up to the horizon.
  double holding_time(std::size_t k) const;

  /// Set for reference-walk paths stopped at the first exit from the quadrant.
  bool exited() const { return exited_; }
  void mark_exited() { exited_ = true; }

  void append(double time, LatticeState next);
  void reserve(std::size_t n);

  /// Ordered jump times inside (0, T) and a legal jump at each; throws otherwise.
  void validate() const;

 private:
  double horizon_ = 0.0;
  std::vector<double> times_;
  std::vector<LatticeState> states_;
  bool exited_ = false;
};

/// x(s) = u(sT)/T for s in [0, 1].
class ScaledView {
 public:
  explicit ScaledView(const StepTrajectory& traj) : traj_(&traj) {}

  std::size_t piece_count() const { return traj_->states().size(); }
  /// Scaled time interval [begin, end) of constant piece k.
  std::pair<double, double> piece_interval(std::size_t k) const;
  PathValue piece_value(std::size_t k) const;
  PathValue value(double s) const;

  const StepTrajectory& trajectory() const { return *traj_; }

 private:
  const StepTrajectory* traj_;
};

/// Exact sup_{s in [0,1]} |x(s) - f(s)|, including left limits at jump times.
double uniform_distance(const ScaledView& x, const PiecewiseLinearPath& target);

enum class EventKind { tube, strip };

/// Tube U_eps(f) = {d(x, f) < eps} or strip {f_i - eps <= x_i <= M}.
class EventSpec {
 public:
  static EventSpec tube(PiecewiseLinearPath target, double epsilon);
  /// Requires M > sup_t max{f1, f2}.
  static EventSpec strip(PiecewiseLinearPath target, double epsilon, double upper);

  EventKind kind() const { return kind_; }
  const PiecewiseLinearPath& target() const { return target_; }
  double epsilon() const { return epsilon_; }
  double upper() const { return upper_; }

  /// Whether a scaled position x at scaled time s satisfies the event's pointwise constraint.
  bool admits(PathValue x, double s) const;

 private:
  EventSpec(EventKind kind, PiecewiseLinearPath target, double epsilon, double upper);

  EventKind kind_;
  PiecewiseLinearPath target_;
  double epsilon_;
  double upper_;
};

bool in_event(const ScaledView& x, const EventSpec& event);
inline bool in_event(const StepTrajectory& traj, const EventSpec& event) {
  return in_event(ScaledView(traj), event);
}

/// J(x) = int_0^1 (c1 x1 + c2 x2 + c3 min{x1, x2}) dt, exact for piecewise-linear input.
/// Rejects negative values.
double rate_integral(const PiecewiseLinearPath& path, const RateParams& params);

/// The same integral restricted to [a, b] with 0 <= a <= b <= 1.
double rate_integral(const PiecewiseLinearPath& path, const RateParams& params, double a,
                     double b);

/// J evaluated on a scaled step path (piecewise constant, so exact).
double rate_integral(const ScaledView& x, const RateParams& params);

/// I(f): rate_integral when f is an admissible target, +infinity otherwise.
double rate_functional(const PiecewiseLinearPath& path, const RateParams& params);

/// inf of I over the strip {f <= g <= M}; attained at g = f.
double strip_inf_rate(const PiecewiseLinearPath& target, double upper, const RateParams& params);

struct UpDownCounts {
  std::size_t k_plus = 0;
  std::size_t k_minus = 0;
};

UpDownCounts count_up_down(const StepTrajectory& traj);

}  // namespace ldp
