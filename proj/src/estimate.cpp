#include "ldp/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "ldp/functional.hpp"
#include "ldp/parallel.hpp"
#include "ldp/rng.hpp"

namespace ldp {

namespace {

constexpr std::size_t kMaxEvents = 32;
constexpr double kMinEss = 10.0;

void check_request(std::size_t n, std::size_t n_events, double horizon) {
  if (n < 1) throw std::invalid_argument("need at least one replica");
  if (n_events < 1 || n_events > kMaxEvents) {
    throw std::invalid_argument("between 1 and 32 events per estimator call");
  }
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

std::uint32_t event_mask(const StepTrajectory& traj, const std::vector<EventSpec>& events) {
  const ScaledView view(traj);
  std::uint32_t mask = 0;
  for (std::size_t e = 0; e < events.size(); ++e) {
    if (in_event(view, events[e])) mask |= 1u << e;
  }
  return mask;
}

void finish(EstimateResult& r) {
  const double T2 = r.horizon * r.horizon;
  if (r.n_hits == 0) {
    r.normalized = std::numeric_limits<double>::quiet_NaN();
    r.warnings.push_back("no hits: log_p_hat is -inf and normalized is undefined");
  } else {
    r.normalized = -r.log_p_hat / T2;
  }
}

EstimateResult aggregate_naive(const std::vector<std::uint32_t>& masks, std::size_t e,
                               double horizon) {
  EstimateResult r;
  r.method = Method::naive;
  r.horizon = horizon;
  r.n_replicas = masks.size();
  for (auto m : masks) r.n_hits += (m >> e) & 1u;
  const double n = static_cast<double>(r.n_replicas);
  r.p_hat = static_cast<double>(r.n_hits) / n;
  r.log_p_hat = std::log(r.p_hat);
  r.std_error = std::sqrt(r.p_hat * (1.0 - r.p_hat) / n);
  r.log_std_error = std::log(r.std_error);
  r.ess = static_cast<double>(r.n_hits);
  finish(r);
  return r;
}

// Two passes: the shift is the maximum log-weight over hits of any event, then
// each event's sums are accumulated in replica order.
std::vector<EstimateResult> aggregate_weighted(const std::vector<double>& log_w,
                                               const std::vector<std::uint32_t>& masks,
                                               std::size_t n_events, Method method,
                                               double horizon) {
  double shift = minus_infinity();
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    if (masks[i] != 0) shift = std::max(shift, log_w[i]);
  }
  if (shift == minus_infinity()) shift = 0.0;

  const double n = static_cast<double>(log_w.size());
  std::vector<EstimateResult> out;
  for (std::size_t e = 0; e < n_events; ++e) {
    EstimateResult r;
    r.method = method;
    r.horizon = horizon;
    r.n_replicas = log_w.size();
    double s1 = 0.0, s2 = 0.0, largest = 0.0;
    for (std::size_t i = 0; i < log_w.size(); ++i) {
      if (((masks[i] >> e) & 1u) == 0) continue;
      const double x = std::exp(log_w[i] - shift);
      s1 += x;
      s2 += x * x;
      largest = std::max(largest, x);
      ++r.n_hits;
    }
    r.log_p_hat = shift + std::log(s1) - std::log(n);
    r.p_hat = std::exp(r.log_p_hat);
    double var = r.n_replicas > 1 ? (s2 - s1 * s1 / n) / (n - 1.0) : 0.0;
    var = std::max(var, 0.0);
    r.log_std_error = shift + 0.5 * (std::log(var) - std::log(n));
    r.std_error = std::exp(r.log_std_error);
    r.ess = largest > 0.0 ? s1 / largest : 0.0;
    if (r.n_hits > 0 && r.ess < kMinEss) {
      r.warnings.push_back("effective sample size " + std::to_string(r.ess) +
                           " below 10: estimate unreliable");
    }
    finish(r);
    out.push_back(std::move(r));
  }
  return out;
}

bool consistency_event(const StepTrajectory& traj) {
  if (traj.exited() || traj.jump_count() > 8) return false;
  for (const auto& z : traj.states()) {
    if (!z.in_quadrant()) return false;
  }
  const LatticeState f = traj.final_state();
  return f.z1 <= 4 && f.z2 <= 4;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::naive: return "naive";
    case Method::zeta_weighted: return "zeta-weighted";
    case Method::guided_is: return "guided-is";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "naive") return Method::naive;
  if (name == "zeta-weighted") return Method::zeta_weighted;
  if (name == "guided-is") return Method::guided_is;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::vector<EstimateResult> estimate_events_naive(const RateParams& params,
                                                  const std::vector<EventSpec>& events,
                                                  double horizon, std::size_t n,
                                                  const McOptions& mc) {
  check_request(n, events.size(), horizon);
  std::vector<std::uint32_t> masks(n);
  parallel_for(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i);
    masks[i] = event_mask(simulate_xi(params, horizon, rng), events);
  });
  std::vector<EstimateResult> out;
  for (std::size_t e = 0; e < events.size(); ++e) out.push_back(aggregate_naive(masks, e, horizon));
  return out;
}

EstimateResult estimate_event_naive(const RateParams& params, const EventSpec& event,
                                    double horizon, std::size_t n, const McOptions& mc) {
  return estimate_events_naive(params, {event}, horizon, n, mc).front();
}

std::vector<EstimateResult> estimate_events_is(const RateParams& params,
                                               const std::vector<EventSpec>& events,
                                               double horizon, std::size_t n,
                                               const McOptions& mc,
                                               const GuidedProposal& proposal) {
  check_request(n, events.size(), horizon);
  if (proposal.horizon() != horizon) {
    throw std::invalid_argument("proposal horizon differs from the estimator horizon");
  }
  const GuidedSampler sampler(proposal, params);
  std::vector<double> log_w(n);
  std::vector<std::uint32_t> masks(n);
  parallel_for(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i);
    const GuidedSample s = sampler(rng);
    log_w[i] = s.log_weight;
    masks[i] = event_mask(s.trajectory, events);
  });
  auto out = aggregate_weighted(log_w, masks, events.size(), Method::guided_is, horizon);
  for (auto& r : out) {
    r.warnings.insert(r.warnings.begin(), proposal.warnings().begin(), proposal.warnings().end());
  }
  return out;
}

EstimateResult estimate_event_is(const RateParams& params, const EventSpec& event,
                                 double horizon, std::size_t n, const McOptions& mc,
                                 const GuidedProposal& proposal) {
  return estimate_events_is(params, {event}, horizon, n, mc, proposal).front();
}

EstimateResult estimate_event_zeta(const RateParams& params, const EventSpec& event,
                                   double horizon, std::size_t n, const McOptions& mc) {
  check_request(n, 1, horizon);
  std::vector<double> log_w(n);
  std::vector<std::uint32_t> masks(n);
  const std::vector<EventSpec> events{event};
  parallel_for(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i);
    const StepTrajectory traj = simulate_zeta(horizon, rng, true);
    if (traj.exited()) {
      log_w[i] = minus_infinity();
      masks[i] = 0;
      return;
    }
    log_w[i] = log_likelihood_ratio_wrt_zeta(params, traj);
    masks[i] = std::isfinite(log_w[i]) ? event_mask(traj, events) : 0;
  });
  return aggregate_weighted(log_w, masks, 1, Method::zeta_weighted, horizon).front();
}

EstimateResult estimate_strip_naive(const RateParams& params, const PiecewiseLinearPath& target,
                                    double epsilon, double upper, double horizon, std::size_t n,
                                    const McOptions& mc) {
  return estimate_event_naive(params, EventSpec::strip(target, epsilon, upper), horizon, n, mc);
}

StripEstimate estimate_strip(const RateParams& params, const PiecewiseLinearPath& target,
                             double epsilon, double upper, double horizon, std::size_t n,
                             const McOptions& mc, const ProposalOptions& proposal) {
  StripEstimate out;
  out.strip_inf_rate = strip_inf_rate(target, upper, params);
  const auto event = EventSpec::strip(target, epsilon, upper);
  const auto q = build_guided_proposal(params, event, horizon, proposal);
  out.estimate = estimate_event_is(params, event, horizon, n, mc, q);
  return out;
}

ConsistencyReport consistency_check(const RateParams& params, double horizon, std::size_t n,
                                    const McOptions& mc) {
  check_request(n, 1, horizon);
  ConsistencyReport rep;
  rep.horizon = horizon;
  rep.n = n;

  const std::uint64_t direct_seed = derive_seed(mc.seed, 1);
  std::vector<std::uint32_t> direct(n);
  parallel_for(n, mc.workers, [&](std::size_t i) {
    RngStream rng(direct_seed, i);
    direct[i] = consistency_event(simulate_xi(params, horizon, rng)) ? 1u : 0u;
  });
  rep.direct = aggregate_naive(direct, 0, horizon);

  const std::uint64_t weighted_seed = derive_seed(mc.seed, 2);
  std::vector<double> log_w(n);
  std::vector<std::uint32_t> masks(n);
  parallel_for(n, mc.workers, [&](std::size_t i) {
    RngStream rng(weighted_seed, i);
    const StepTrajectory traj = simulate_zeta(horizon, rng, true);
    if (traj.exited()) {
      log_w[i] = minus_infinity();
      masks[i] = 0;
      return;
    }
    log_w[i] = log_likelihood_ratio_wrt_zeta(params, traj);
    masks[i] = (consistency_event(traj) ? 1u : 0u) | 2u;
  });
  auto weighted = aggregate_weighted(log_w, masks, 2, Method::zeta_weighted, horizon);
  rep.weighted = weighted[0];
  rep.total_mass = weighted[1];
  const double se = std::hypot(rep.direct.std_error, rep.weighted.std_error);
  rep.z_score = se > 0.0 ? (rep.direct.p_hat - rep.weighted.p_hat) / se : 0.0;
  return rep;
}

std::pair<LinearFit, LinearFit> fit_against_t_squared(const std::vector<double>& horizons,
                                                      const std::vector<double>& neg_log_p) {
  if (horizons.size() != neg_log_p.size()) throw std::invalid_argument("fit size mismatch");
  LinearFit free_fit, zero_fit;
  const std::size_t m = horizons.size();
  if (m < 2) return {free_fit, zero_fit};
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += horizons[i] * horizons[i];
    sy += neg_log_p[i];
  }
  const double mx = sx / static_cast<double>(m), my = sy / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, qxx = 0.0, qxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = horizons[i] * horizons[i];
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (neg_log_p[i] - my);
    qxx += x * x;
    qxy += x * neg_log_p[i];
  }
  if (sxx > 0.0) {
    free_fit.slope = sxy / sxx;
    free_fit.intercept = my - free_fit.slope * mx;
    free_fit.valid = true;
  }
  zero_fit.slope = qxy / qxx;
  zero_fit.valid = true;
  return {free_fit, zero_fit};
}

std::vector<ScalingStudyResult> scaling_study(const RateParams& params,
                                              const std::vector<EventSpec>& events,
                                              const std::vector<double>& horizons,
                                              std::size_t n, const McOptions& mc,
                                              const ProposalOptions& proposal) {
  if (horizons.size() < 2) throw std::invalid_argument("scaling study needs at least two horizons");
  for (std::size_t k = 1; k < horizons.size(); ++k) {
    if (!(horizons[k] > horizons[k - 1])) {
      throw std::invalid_argument("scaling horizons must be strictly increasing");
    }
  }
  if (events.empty()) throw std::invalid_argument("scaling study needs an event");

  std::vector<ScalingStudyResult> out(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) {
    out[e].target_rate = rate_functional(events[e].target(), params);
  }
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    const double T = horizons[k];
    const McOptions sub{derive_seed(mc.seed, k), mc.workers};
    for (std::size_t e = 0; e < events.size(); ++e) {
      const auto q = build_guided_proposal(params, events[e], T, proposal);
      ScalingRow row;
      row.horizon = T;
      row.estimate = estimate_event_is(params, events[e], T, n, sub, q);
      row.in_fit = row.estimate.n_hits > 0 && std::isfinite(row.estimate.log_p_hat);
      if (!row.in_fit) {
        out[e].warnings.push_back("T = " + std::to_string(T) + " has no hits; excluded from fit");
      }
      out[e].rows.push_back(std::move(row));
    }
  }
  for (auto& study : out) {
    std::vector<double> xs, ys;
    for (const auto& row : study.rows) {
      if (!row.in_fit) continue;
      xs.push_back(row.horizon);
      ys.push_back(-row.estimate.log_p_hat);
    }
    std::tie(study.free_fit, study.zero_fit) = fit_against_t_squared(xs, ys);
    if (!study.free_fit.valid) study.warnings.push_back("fewer than two usable rows; no fit");
  }
  return out;
}

ScalingStudyResult scaling_study(const RateParams& params, const PiecewiseLinearPath& target,
                                 double epsilon, const std::vector<double>& horizons,
                                 std::size_t n, const McOptions& mc,
                                 const ProposalOptions& proposal) {
  return scaling_study(params, {EventSpec::tube(target, epsilon)}, horizons, n, mc, proposal)
      .front();
}

}  // namespace ldp
