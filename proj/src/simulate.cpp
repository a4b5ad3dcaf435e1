#include "ldp/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>


namespace ldp {

namespace {

constexpr int kStreamPrecision = 17;

std::vector<double> piece_grid(const PiecewiseLinearPath& target, std::size_t pieces) {
  std::vector<double> grid;
  for (const auto& b : target.breakpoints()) grid.push_back(b.t);
  const std::size_t n = std::max<std::size_t>(pieces, 1);
  for (std::size_t k = 0; k <= n; ++k) grid.push_back(static_cast<double>(k) / static_cast<double>(n));
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (double t : grid) {
    if (out.empty() || t - out.back() > 1e-12) out.push_back(t);
  }
  out.back() = 1.0;
  return out;
}

std::string piece_label(double sa, double sb) {
  return "[" + std::to_string(sa) + ", " + std::to_string(sb) + "]";
}

std::vector<ProposalPiece> drift_matched_pieces(const RateParams& params,
                                                const PiecewiseLinearPath& target, double horizon,
                                                const std::vector<double>& grid, double alpha_min,
                                                std::vector<std::string>& warnings) {
  std::vector<ProposalPiece> pieces;
  pieces.reserve(grid.size() - 1);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double sa = grid[k], sb = grid[k + 1];
    const PathValue fa = target.value(sa), fb = target.value(sb);
    const PathValue mid = target.value(0.5 * (sa + sb));
    // Unscaled velocity of z(t) = T f(t / T) is f'(t / T).
    const double v1 = (fb.x1 - fa.x1) / (sb - sa);
    const double v2 = (fb.x2 - fa.x2) / (sb - sa);
    const double z1 = horizon * mid.x1, z2 = horizon * mid.x2, zm = std::min(z1, z2);
    const double a1 = v1 + params.c1() * z1 + params.c3() * zm;
    const double a2 = v2 + params.c2() * z2 + params.c3() * zm;
    ProposalPiece p;
    p.begin = sa * horizon;
    p.end = sb * horizon;
    p.up1 = std::max(alpha_min, a1);
    p.up2 = std::max(alpha_min, a2);
    if (a1 < alpha_min || a2 < alpha_min) {
      warnings.push_back("up-rate floored at alpha_min on piece " + piece_label(sa, sb));
    }
    pieces.push_back(std::move(p));
  }
  return pieces;
}

// Survival probabilities on the box [0, L)^2, advanced backwards in time.
class BackwardSolver {
 public:
  BackwardSolver(const RateParams& params, const EventSpec& event, double horizon, std::int64_t L)
      : event_(event), horizon_(horizon), L_(L), n_(static_cast<std::size_t>(L * L)) {
    rate_.resize(n_);
    for (std::int64_t a = 0; a < L; ++a) {
      for (std::int64_t b = 0; b < L; ++b) {
        rate_[index(a, b)] = jump_intensities(params, LatticeState{a, b});
        max_total_ = std::max(max_total_, total_rate(params, LatticeState{a, b}));
      }
    }
    q_.assign(n_, 0.0);
    kill(horizon);
    for (std::size_t i = 0; i < n_; ++i) {
      if (alive_[i]) q_[i] = 1.0;
    }
    k1_.resize(n_);
    k2_.resize(n_);
    k3_.resize(n_);
    k4_.resize(n_);
    tmp_.resize(n_);
  }

  double max_total() const { return max_total_; }
  const std::vector<double>& values() const { return q_; }
  std::size_t index(std::int64_t a, std::int64_t b) const {
    return static_cast<std::size_t>(a * L_ + b);
  }
  double at(std::int64_t a, std::int64_t b) const {
    if (a < 0 || b < 0 || a >= L_ || b >= L_) return 0.0;
    return q_[index(a, b)];
  }

  // One RK4 step from time t to t - dt, then killing at t - dt and rescaling to max 1.
  void step(double t, double dt) {
    apply(q_, k1_);
    axpy(q_, k1_, 0.5 * dt, tmp_);
    apply(tmp_, k2_);
    axpy(q_, k2_, 0.5 * dt, tmp_);
    apply(tmp_, k3_);
    axpy(q_, k3_, dt, tmp_);
    apply(tmp_, k4_);
    double peak = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      q_[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
      q_[i] = std::max(q_[i], 0.0);
    }
    kill(t - dt);
    for (std::size_t i = 0; i < n_; ++i) {
      if (!alive_[i]) q_[i] = 0.0;
      peak = std::max(peak, q_[i]);
    }
    if (peak > 0.0) {
      for (double& v : q_) v /= peak;
    }
  }

 private:
  void kill(double t) {
    alive_.assign(n_, false);
    const double s = std::clamp(t / horizon_, 0.0, 1.0);
    for (std::int64_t a = 0; a < L_; ++a) {
      for (std::int64_t b = 0; b < L_; ++b) {
        const PathValue x{static_cast<double>(a) / horizon_, static_cast<double>(b) / horizon_};
        alive_[index(a, b)] = event_.admits(x, s);
      }
    }
  }

  // out = G in, with G the generator of the quadrant process and q = 0 off the box.
  void apply(const std::vector<double>& in, std::vector<double>& out) const {
    auto get = [&](std::int64_t a, std::int64_t b) {
      if (a < 0 || b < 0 || a >= L_ || b >= L_) return 0.0;
      return in[index(a, b)];
    };
    for (std::int64_t a = 0; a < L_; ++a) {
      for (std::int64_t b = 0; b < L_; ++b) {
        const std::size_t i = index(a, b);
        const auto& r = rate_[i];
        double g = 0.0;
        for (Jump j : kAllJumps) {
          const auto idx = static_cast<std::size_t>(j);
          if (r[idx] == 0.0) continue;
          const JumpVector y = jump_vector(j);
          g += r[idx] * (get(a + y.dz1, b + y.dz2) - in[i]);
        }
        out[i] = g;
      }
    }
  }

  static void axpy(const std::vector<double>& x, const std::vector<double>& k, double h,
                   std::vector<double>& out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + h * k[i];
  }

  const EventSpec& event_;
  double horizon_;
  std::int64_t L_;
  std::size_t n_;
  double max_total_ = 0.0;
  std::vector<std::array<double, kJumpCount>> rate_;
  std::vector<double> q_, k1_, k2_, k3_, k4_, tmp_;
  std::vector<bool> alive_;
};

std::vector<ProposalPiece> h_transform_pieces(const RateParams& params, const EventSpec& event,
                                              double horizon, const std::vector<double>& grid,
                                              double floor, std::int64_t L,
                                              std::vector<std::string>& warnings) {
  BackwardSolver solver(params, event, horizon, L);
  const double dt_max = std::min(0.02, 1.0 / solver.max_total());
  std::vector<ProposalPiece> pieces(grid.size() - 1);
  bool empty_warned = false;
  for (std::size_t k = grid.size() - 1; k-- > 0;) {
    const double ta = grid[k] * horizon, tb = grid[k + 1] * horizon;
    const auto half = static_cast<std::size_t>(std::ceil((tb - ta) / (2.0 * dt_max)));
    const double dt = (tb - ta) / static_cast<double>(2 * half);
    double t = tb;
    ProposalPiece& p = pieces[k];
    p.begin = ta;
    p.end = tb;
    for (std::size_t s = 0; s < 2 * half; ++s) {
      solver.step(t, dt);
      t -= dt;
      if (s + 1 != half) continue;
      p.multipliers.assign(static_cast<std::size_t>(L * L), {1.0, 1.0, 1.0, 1.0, 1.0});
      bool any = false;
      for (std::int64_t a = 0; a < L; ++a) {
        for (std::int64_t b = 0; b < L; ++b) {
          const double qz = solver.at(a, b);
          if (!(qz > 0.0)) continue;
          any = true;
          auto& m = p.multipliers[solver.index(a, b)];
          for (Jump j : kAllJumps) {
            const JumpVector y = jump_vector(j);
            if (a + y.dz1 < 0 || b + y.dz2 < 0) continue;
            const double ratio = solver.at(a + y.dz1, b + y.dz2) / qz;
            m[static_cast<std::size_t>(j)] = std::clamp(ratio, floor, 1.0 / floor);
          }
        }
      }
      if (!any && !empty_warned) {
        warnings.push_back("event has no admissible lattice state on piece " +
                           piece_label(grid[k], grid[k + 1]) + "; using the free dynamics there");
        empty_warned = true;
      }
    }
  }
  return pieces;
}

}  // namespace

std::string to_string(ProposalKind kind) {
  switch (kind) {
    case ProposalKind::drift_matched: return "drift-matched";
    case ProposalKind::h_transform: return "h-transform";
  }
  return "?";
}

ProposalKind proposal_kind_from_string(const std::string& name) {
  if (name == "drift-matched") return ProposalKind::drift_matched;
  if (name == "h-transform") return ProposalKind::h_transform;
  throw std::invalid_argument("unknown proposal kind '" + name + "'");
}

StepTrajectory simulate_xi(const RateParams& params, double horizon, RngStream& rng) {
  StepTrajectory traj(horizon, LatticeState{0, 0});
  LatticeState z{0, 0};
  double t = 0.0;
  const double c0 = params.c0();
  for (;;) {
    const double d1 = static_cast<double>(z.z1) * params.down1();
    const double d2 = static_cast<double>(z.z2) * params.down2();
    const double dj = static_cast<double>(std::min(z.z1, z.z2)) * params.joint();
    const double h = (((c0 + d1) + d2) + dj);
    t += rng.exponential(h);
    if (t >= horizon) break;
    const double u = rng.uniform() * h;
    JumpVector y;
    if (u < params.up1()) {
      y = {1, 0};
    } else if (u < c0) {
      y = {0, 1};
    } else if (u < c0 + d1) {
      y = {-1, 0};
    } else if (u < c0 + d1 + d2) {
      y = {0, -1};
    } else {
      y = {-1, -1};
    }
    z = z + y;
    traj.append(t, z);
  }
  return traj;
}

StepTrajectory simulate_zeta(double horizon, RngStream& rng, bool stop_on_exit) {
  StepTrajectory traj(horizon, LatticeState{0, 0});
  LatticeState z{0, 0};
  double t = 0.0;
  for (;;) {
    t += rng.exponential(1.0);
    if (t >= horizon) break;
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(rng.uniform() * 5.0), 4);
    z = z + jump_vector(kAllJumps[k]);
    traj.append(t, z);
    if (stop_on_exit && !z.in_quadrant()) {
      traj.mark_exited();
      break;
    }
  }
  return traj;
}

GuidedProposal::GuidedProposal(double horizon, std::vector<ProposalPiece> pieces,
                               double alpha_min, std::int64_t extent)
    : horizon_(horizon), pieces_(std::move(pieces)), alpha_min_(alpha_min), extent_(extent) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(alpha_min > 0.0)) throw std::invalid_argument("alpha_min must be positive");
  if (pieces_.empty()) throw std::invalid_argument("proposal needs at least one piece");
  for (const auto& p : pieces_) {
    if (!(p.up_scale > 0.0)) throw std::invalid_argument("proposal intensities must be positive");
    if (!p.tabulated()) {
      if (!(p.up1 > 0.0 && p.up2 > 0.0)) {
        throw std::invalid_argument("proposal intensities must be positive");
      }
      continue;
    }
    if (extent_ < 1 || p.multipliers.size() != static_cast<std::size_t>(extent_ * extent_)) {
      throw std::invalid_argument("multiplier table does not match the proposal extent");
    }
    for (const auto& m : p.multipliers) {
      for (double v : m) {
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw std::invalid_argument("proposal multipliers must be positive and finite");
        }
      }
    }
  }
  pieces_.front().begin = 0.0;
  pieces_.back().end = horizon;
}

GuidedProposal GuidedProposal::identity(const RateParams& params, double horizon) {
  ProposalPiece p;
  p.begin = 0.0;
  p.end = horizon;
  p.up1 = params.up1();
  p.up2 = params.up2();
  return GuidedProposal(horizon, {p}, std::min(params.up1(), params.up2()));
}

GuidedProposal GuidedProposal::with_scaled_up_rates(double factor) const {
  auto pieces = pieces_;
  for (auto& p : pieces) {
    if (p.tabulated()) {
      p.up_scale *= factor;
    } else {
      p.up1 *= factor;
      p.up2 *= factor;
    }
  }
  GuidedProposal out(horizon_, std::move(pieces), alpha_min_, extent_);
  out.warnings_ = warnings_;
  return out;
}

std::size_t GuidedProposal::piece_at(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const ProposalPiece& p) { return v < p.end; });
  if (it == pieces_.end()) return pieces_.size() - 1;
  return static_cast<std::size_t>(it - pieces_.begin());
}

GuidedProposal build_guided_proposal(const RateParams& params, const PiecewiseLinearPath& target,
                                     double horizon, double alpha_min) {
  if (!(alpha_min > 0.0)) throw std::invalid_argument("alpha_min must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (auto report = validate_target(target)) throw std::invalid_argument(report->message);
  std::vector<double> grid;
  for (const auto& b : target.breakpoints()) grid.push_back(b.t);
  std::vector<std::string> warnings;
  auto pieces = drift_matched_pieces(params, target, horizon, grid, alpha_min, warnings);
  GuidedProposal out(horizon, std::move(pieces), alpha_min);
  for (auto& w : warnings) out.add_warning(std::move(w));
  return out;
}

GuidedProposal build_guided_proposal(const RateParams& params, const EventSpec& event,
                                     double horizon, const ProposalOptions& options) {
  if (!(options.alpha_min > 0.0)) throw std::invalid_argument("alpha_min must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(options.ratio_floor > 0.0 && options.ratio_floor < 1.0)) {
    throw std::invalid_argument("ratio_floor must lie in (0, 1)");
  }
  const auto& target = event.target();
  if (auto report = validate_target(target)) throw std::invalid_argument(report->message);

  const std::size_t n_pieces =
      options.pieces > 0 ? options.pieces
                         : std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(16.0 * horizon)));
  const auto grid = piece_grid(target, n_pieces);
  std::vector<std::string> warnings;
  if (options.kind == ProposalKind::drift_matched) {
    auto pieces = drift_matched_pieces(params, target, horizon, grid, options.alpha_min, warnings);
    GuidedProposal out(horizon, std::move(pieces), options.alpha_min);
    for (auto& w : warnings) out.add_warning(std::move(w));
    return out;
  }
  const double top = event.kind() == EventKind::tube ? target.sup_max() + event.epsilon()
                                                     : event.upper();
  const auto L = static_cast<std::int64_t>(std::floor(horizon * top)) + 2;
  auto pieces = h_transform_pieces(params, event, horizon, grid, options.ratio_floor, L, warnings);
  GuidedProposal out(horizon, std::move(pieces), options.alpha_min, L);
  for (auto& w : warnings) out.add_warning(std::move(w));
  return out;
}

GuidedSampler::GuidedSampler(const GuidedProposal& proposal, const RateParams& params)
    : params_(params), horizon_(proposal.horizon()), extent_(proposal.extent()) {
  pieces_.reserve(proposal.pieces().size());
  for (const auto& p : proposal.pieces()) {
    Piece c;
    c.end = p.end;
    c.up1 = p.up1;
    c.up2 = p.up2;
    c.log_up1 = p.tabulated() ? 0.0 : std::log(params.up1() / p.up1);
    c.log_up2 = p.tabulated() ? 0.0 : std::log(params.up2() / p.up2);
    c.up_scale = p.up_scale;
    if (p.tabulated()) {
      const std::int64_t L = extent_;
      c.table.resize(static_cast<std::size_t>(L * L));
      for (std::int64_t a = 0; a < L; ++a) {
        for (std::int64_t b = 0; b < L; ++b) {
          const auto i = static_cast<std::size_t>(a * L + b);
          const LatticeState z{a, b};
          const auto r = jump_intensities(params, z);
          const auto& m = p.multipliers[i];
          Local& loc = c.table[i];
          loc.total = 0.0;
          for (Jump j : kAllJumps) {
            const auto idx = static_cast<std::size_t>(j);
            const double factor = is_up(j) ? m[idx] * p.up_scale : m[idx];
            loc.rate[idx] = r[idx] * factor;
            loc.log_ratio[idx] = -std::log(factor);
            loc.total += loc.rate[idx];
          }
          loc.diff = loc.total - total_rate(params, z);
        }
      }
    }
    pieces_.push_back(std::move(c));
  }
  pieces_.back().end = horizon_;
}

GuidedSampler::Local GuidedSampler::local(const Piece& c, LatticeState z) const {
  if (!c.table.empty() && z.z1 < extent_ && z.z2 < extent_) {
    return c.table[static_cast<std::size_t>(z.z1 * extent_ + z.z2)];
  }
  const double x1 = static_cast<double>(z.z1), x2 = static_cast<double>(z.z2);
  const double xm = std::min(x1, x2);
  Local loc;
  if (c.table.empty()) {
    loc.rate = {c.up1, c.up2, params_.c1() * x1, params_.c2() * x2, params_.c3() * xm};
    loc.log_ratio = {c.log_up1, c.log_up2, 0.0, 0.0, 0.0};
  } else {
    const double ls = -std::log(c.up_scale);
    loc.rate = {params_.up1() * c.up_scale, params_.up2() * c.up_scale, params_.c1() * x1,
                params_.c2() * x2, params_.c3() * xm};
    loc.log_ratio = {ls, ls, 0.0, 0.0, 0.0};
  }
  loc.total = (((loc.rate[0] + loc.rate[1]) + loc.rate[2]) + loc.rate[3]) + loc.rate[4];
  loc.diff = (loc.rate[0] + loc.rate[1]) - params_.c0();
  return loc;
}

GuidedSample GuidedSampler::operator()(RngStream& rng) const {
  GuidedSample out{StepTrajectory(horizon_, LatticeState{0, 0}), 0.0};
  StepTrajectory& traj = out.trajectory;
  double log_w = 0.0;
  LatticeState z{0, 0};
  double t = 0.0;
  std::size_t k = 0;
  Local loc = local(pieces_[0], z);
  for (;;) {
    const double end = pieces_[k].end;
    const double next = t + rng.exponential(loc.total);
    if (next >= end) {
      log_w += loc.diff * (end - t);
      t = end;
      if (++k == pieces_.size()) break;
      loc = local(pieces_[k], z);
      continue;
    }
    log_w += loc.diff * (next - t);
    t = next;
    const double u = rng.uniform() * loc.total;
    std::size_t j = 0;
    double acc = loc.rate[0];
    while (j + 1 < kJumpCount && !(u < acc)) acc += loc.rate[++j];
    log_w += loc.log_ratio[j];
    z = z + jump_vector(kAllJumps[j]);
    traj.append(t, z);
    loc = local(pieces_[k], z);
  }
  out.log_weight = log_w;
  return out;
}

double GuidedSampler::log_weight(const StepTrajectory& traj) const {
  double log_w = 0.0;
  const auto& times = traj.jump_times();
  const auto& states = traj.states();
  std::size_t k = 0;
  double t = 0.0;
  for (std::size_t i = 0; i <= times.size(); ++i) {
    const LatticeState z = states[i];
    const double stop = i < times.size() ? times[i] : horizon_;
    while (k < pieces_.size()) {
      const Local loc = local(pieces_[k], z);
      if (stop >= pieces_[k].end) {
        log_w += loc.diff * (pieces_[k].end - t);
        t = pieces_[k].end;
        ++k;
        continue;
      }
      log_w += loc.diff * (stop - t);
      t = stop;
      break;
    }
    if (i < times.size()) {
      Jump j;
      if (!classify_jump(traj.jump(i), j)) throw std::invalid_argument("illegal jump");
      const Local loc = local(pieces_[std::min(k, pieces_.size() - 1)], z);
      log_w += loc.log_ratio[static_cast<std::size_t>(j)];
    }
  }
  return log_w;
}

GuidedSample simulate_guided(const GuidedProposal& proposal, const RateParams& params,
                             RngStream& rng) {
  return GuidedSampler(proposal, params)(rng);
}

double guided_log_weight(const GuidedProposal& proposal, const RateParams& params,
                         const StepTrajectory& traj) {
  for (const auto& z : traj.states()) {
    if (!z.in_quadrant()) throw std::invalid_argument("guided weight needs a quadrant path");
  }
  return GuidedSampler(proposal, params).log_weight(traj);
}

void write_trajectory_csv(std::ostream& out, std::size_t replica, const StepTrajectory& traj) {
  const auto old = out.precision(kStreamPrecision);
  const auto& states = traj.states();
  out << replica << ',' << 0.0 << ',' << states[0].z1 << ',' << states[0].z2 << '\n';
  for (std::size_t i = 0; i < traj.jump_count(); ++i) {
    out << replica << ',' << traj.jump_times()[i] << ',' << states[i + 1].z1 << ','
        << states[i + 1].z2 << '\n';
  }
  out.precision(old);
}

}  // namespace ldp
