#include "ldp/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldp {

namespace {

double norm(double a, double b) { return std::hypot(a, b); }

double lerp(double a, double b, double w) { return a + (b - a) * w; }

double integrand(const RateParams& p, double x1, double x2) {
  return p.c1() * x1 + p.c2() * x2 + p.c3() * std::min(x1, x2);
}

// Visits every point where the sup over a constant piece of x can be attained:
// both ends of the piece (the right end as a left limit) and the target's
// breakpoints strictly inside it. Returns false as soon as `visit` does.
template <class Visit>
bool for_each_extremal_point(const ScaledView& x, const PiecewiseLinearPath& target,
                             Visit&& visit) {
  const auto& bp = target.breakpoints();
  std::size_t j = 0;
  for (std::size_t k = 0; k < x.piece_count(); ++k) {
    const auto [a, b] = x.piece_interval(k);
    const PathValue v = x.piece_value(k);
    if (!visit(v, target.value(a)) || !visit(v, target.value(b))) return false;
    while (j < bp.size() && bp[j].t <= a) ++j;
    for (std::size_t i = j; i < bp.size() && bp[i].t < b; ++i) {
      if (!visit(v, PathValue{bp[i].f1, bp[i].f2})) return false;
    }
  }
  return true;
}

}  // namespace

PiecewiseLinearPath::PiecewiseLinearPath(std::vector<Breakpoint> breakpoints)
    : bp_(std::move(breakpoints)) {
  if (bp_.empty()) throw std::invalid_argument("target path needs at least one breakpoint");
}

PiecewiseLinearPath PiecewiseLinearPath::diagonal() {
  return PiecewiseLinearPath({{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}});
}

PathValue PiecewiseLinearPath::value(double t) const {
  if (t <= bp_.front().t) return {bp_.front().f1, bp_.front().f2};
  if (t >= bp_.back().t) return {bp_.back().f1, bp_.back().f2};
  auto it = std::upper_bound(bp_.begin(), bp_.end(), t,
                             [](double v, const Breakpoint& b) { return v < b.t; });
  const Breakpoint& hi = *it;
  const Breakpoint& lo = *(it - 1);
  const double w = (t - lo.t) / (hi.t - lo.t);
  return {lerp(lo.f1, hi.f1, w), lerp(lo.f2, hi.f2, w)};
}

double PiecewiseLinearPath::sup_max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& b : bp_) m = std::max({m, b.f1, b.f2});
  return m;
}

void PiecewiseLinearPath::require_time_grid() const {
  if (bp_.front().t != 0.0) throw std::invalid_argument("path must start at t = 0");
  if (bp_.back().t != 1.0) throw std::invalid_argument("path must end at t = 1");
  for (std::size_t i = 1; i < bp_.size(); ++i) {
    if (!(bp_[i].t > bp_[i - 1].t)) {
      throw std::invalid_argument("path breakpoint times must be strictly increasing");
    }
  }
}

std::string to_string(TargetViolation v) {
  switch (v) {
    case TargetViolation::initial_point: return "F1";
    case TargetViolation::positivity: return "F2";
    case TargetViolation::time_ordering: return "time-ordering";
    case TargetViolation::terminal_time: return "terminal-time";
  }
  return "?";
}

std::optional<TargetReport> validate_target(const PiecewiseLinearPath& path) {
  const auto& bp = path.breakpoints();
  const Breakpoint& first = bp.front();
  if (first.t != 0.0 || first.f1 != 0.0 || first.f2 != 0.0) {
    return TargetReport{TargetViolation::initial_point,
                        "F1 violated: first breakpoint must be (0, 0, 0)"};
  }
  for (std::size_t i = 1; i < bp.size(); ++i) {
    if (!(bp[i].f1 > 0.0) || !(bp[i].f2 > 0.0)) {
      return TargetReport{TargetViolation::positivity,
                          "F2 violated: non-positive value at t = " + std::to_string(bp[i].t)};
    }
  }
  for (std::size_t i = 1; i < bp.size(); ++i) {
    if (!(bp[i].t > bp[i - 1].t)) {
      return TargetReport{TargetViolation::time_ordering,
                          "breakpoint times must be strictly increasing"};
    }
  }
  if (bp.back().t != 1.0) {
    return TargetReport{TargetViolation::terminal_time, "last breakpoint must be at t = 1"};
  }
  return std::nullopt;
}

StepTrajectory::StepTrajectory(double horizon, LatticeState initial)
    : horizon_(horizon), states_{initial} {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

double StepTrajectory::holding_time(std::size_t k) const {
  const double begin = k == 0 ? 0.0 : times_[k - 1];
  const double end = k < times_.size() ? times_[k] : horizon_;
  return end - begin;
}

void StepTrajectory::append(double time, LatticeState next) {
  times_.push_back(time);
  states_.push_back(next);
}

void StepTrajectory::reserve(std::size_t n) {
  times_.reserve(n);
  states_.reserve(n + 1);
}

void StepTrajectory::validate() const {
  if (states_.size() != times_.size() + 1) {
    throw std::invalid_argument("trajectory needs one more state than jump times");
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] > prev) || !(times_[i] < horizon_)) {
      throw std::invalid_argument("jump times must increase strictly inside (0, T)");
    }
    prev = times_[i];
    Jump j;
    if (!classify_jump(jump(i), j)) {
      throw std::invalid_argument("consecutive states must differ by an admissible jump");
    }
  }
}

std::pair<double, double> ScaledView::piece_interval(std::size_t k) const {
  const auto& t = traj_->jump_times();
  const double T = traj_->horizon();
  const double begin = k == 0 ? 0.0 : t[k - 1] / T;
  const double end = k < t.size() ? t[k] / T : 1.0;
  return {begin, end};
}

PathValue ScaledView::piece_value(std::size_t k) const {
  const LatticeState z = traj_->states()[k];
  const double T = traj_->horizon();
  return {static_cast<double>(z.z1) / T, static_cast<double>(z.z2) / T};
}

PathValue ScaledView::value(double s) const {
  const auto& t = traj_->jump_times();
  const double T = traj_->horizon();
  auto it = std::upper_bound(t.begin(), t.end(), s * T);
  return piece_value(static_cast<std::size_t>(it - t.begin()));
}

double uniform_distance(const ScaledView& x, const PiecewiseLinearPath& target) {
  double best = 0.0;
  for_each_extremal_point(x, target, [&](PathValue v, PathValue f) {
    best = std::max(best, norm(v.x1 - f.x1, v.x2 - f.x2));
    return true;
  });
  return best;
}

EventSpec::EventSpec(EventKind kind, PiecewiseLinearPath target, double epsilon, double upper)
    : kind_(kind), target_(std::move(target)), epsilon_(epsilon), upper_(upper) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

EventSpec EventSpec::tube(PiecewiseLinearPath target, double epsilon) {
  return EventSpec(EventKind::tube, std::move(target), epsilon,
                   std::numeric_limits<double>::infinity());
}

EventSpec EventSpec::strip(PiecewiseLinearPath target, double epsilon, double upper) {
  if (!(upper > target.sup_max())) {
    throw std::invalid_argument("strip bound M must exceed sup_t max{f1(t), f2(t)}");
  }
  return EventSpec(EventKind::strip, std::move(target), epsilon, upper);
}

bool EventSpec::admits(PathValue x, double s) const {
  const PathValue f = target_.value(s);
  if (kind_ == EventKind::tube) return norm(x.x1 - f.x1, x.x2 - f.x2) < epsilon_;
  return x.x1 >= f.x1 - epsilon_ && x.x2 >= f.x2 - epsilon_ && x.x1 <= upper_ && x.x2 <= upper_;
}

bool in_event(const ScaledView& x, const EventSpec& event) {
  const double eps = event.epsilon();
  if (event.kind() == EventKind::tube) {
    return for_each_extremal_point(x, event.target(), [eps](PathValue v, PathValue f) {
      return norm(v.x1 - f.x1, v.x2 - f.x2) < eps;
    });
  }
  const double upper = event.upper();
  return for_each_extremal_point(x, event.target(), [eps, upper](PathValue v, PathValue f) {
    return v.x1 >= f.x1 - eps && v.x2 >= f.x2 - eps && v.x1 <= upper && v.x2 <= upper;
  });
}

double rate_integral(const PiecewiseLinearPath& path, const RateParams& params, double a,
                     double b) {
  path.require_time_grid();
  if (!(a >= 0.0 && a <= b && b <= 1.0)) {
    throw std::invalid_argument("integration bounds must satisfy 0 <= a <= b <= 1");
  }
  const auto& bp = path.breakpoints();
  for (const auto& p : bp) {
    if (p.f1 < 0.0 || p.f2 < 0.0) {
      throw std::invalid_argument("rate integral needs non-negative components");
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double u = std::max(a, bp[i].t);
    const double v = std::min(b, bp[i + 1].t);
    if (!(v > u)) continue;
    const PathValue p = path.value(u);
    const PathValue q = path.value(v);
    const double d0 = p.x1 - p.x2;
    const double d1 = q.x1 - q.x2;
    const double gu = integrand(params, p.x1, p.x2);
    const double gv = integrand(params, q.x1, q.x2);
    if (d0 * d1 < 0.0) {
      // min{x1, x2} switches branch at the crossing; integrand is affine on each side.
      const double w = d0 / (d0 - d1);
      const double tc = u + (v - u) * w;
      const double gc = integrand(params, lerp(p.x1, q.x1, w), lerp(p.x2, q.x2, w));
      total += 0.5 * (tc - u) * (gu + gc) + 0.5 * (v - tc) * (gc + gv);
    } else {
      total += 0.5 * (v - u) * (gu + gv);
    }
  }
  return total;
}

double rate_integral(const PiecewiseLinearPath& path, const RateParams& params) {
  return rate_integral(path, params, 0.0, 1.0);
}

double rate_integral(const ScaledView& x, const RateParams& params) {
  double total = 0.0;
  for (std::size_t k = 0; k < x.piece_count(); ++k) {
    const auto [a, b] = x.piece_interval(k);
    const PathValue v = x.piece_value(k);
    if (v.x1 < 0.0 || v.x2 < 0.0) {
      throw std::invalid_argument("rate integral needs non-negative components");
    }
    total += (b - a) * integrand(params, v.x1, v.x2);
  }
  return total;
}

double rate_functional(const PiecewiseLinearPath& path, const RateParams& params) {
  if (validate_target(path)) return std::numeric_limits<double>::infinity();
  return rate_integral(path, params);
}

double strip_inf_rate(const PiecewiseLinearPath& target, double upper, const RateParams& params) {
  if (auto report = validate_target(target)) throw std::invalid_argument(report->message);
  if (!(upper > target.sup_max())) {
    throw std::invalid_argument("strip bound M must exceed sup_t max{f1(t), f2(t)}");
  }
  // The integrand is non-decreasing in each coordinate, so the lower boundary is optimal.
  return rate_functional(target, params);
}

UpDownCounts count_up_down(const StepTrajectory& traj) {
  UpDownCounts c;
  for (std::size_t i = 0; i < traj.jump_count(); ++i) {
    Jump j;
    if (!classify_jump(traj.jump(i), j)) throw std::invalid_argument("illegal jump in trajectory");
    if (is_up(j)) {
      ++c.k_plus;
    } else {
      ++c.k_minus;
    }
  }
  return c;
}

}  // namespace ldp
