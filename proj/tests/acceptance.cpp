// Acceptance suite: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ldp/estimate.hpp"
#include "ldp/functional.hpp"
#include "ldp/parallel.hpp"
#include "ldp/rng.hpp"
#include "ldp/simulate.hpp"
#include "oracle/forward_equation.hpp"
#include "oracle/quadrature.hpp"

using namespace ldp;

namespace {

constexpr std::uint64_t kSeed = 20240611;
const RateParams kUnit = RateParams::unit();
const PiecewiseLinearPath kDiag = PiecewiseLinearPath::diagonal();

struct Outcome {
  bool pass = false;
  std::string detail;
  // machine-readable values, compared bytewise across worker counts
  std::string record;
};

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void add(std::string& record, double v) { record += g17(v) + ";"; }

void add(std::string& record, const EstimateResult& r) {
  add(record, r.p_hat);
  add(record, r.log_p_hat);
  add(record, r.std_error);
  add(record, static_cast<double>(r.n_hits));
  add(record, r.ess);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------------------

Outcome rate_exactness() {
  Outcome o;
  const PiecewiseLinearPath slope2({{0, 0, 0}, {1, 1, 2}});
  const double i1 = rate_functional(kDiag, kUnit);
  const double i2 = rate_functional(slope2, kUnit);
  const double q1 = oracle::simpson_rate_integral(kDiag, kUnit);
  const double q2 = oracle::simpson_rate_integral(slope2, kUnit);
  o.pass = std::abs(i1 - 1.5) < 1e-12 && std::abs(i2 - 2.0) < 1e-12 && std::abs(i1 - q1) < 1e-6 &&
           std::abs(i2 - q2) < 1e-6;
  o.detail = "I(t,t) = " + g17(i1) + ", I(t,2t) = " + g17(i2) + ", quadrature gaps " +
             fmt("%.1e", std::abs(i1 - q1)) + " / " + fmt("%.1e", std::abs(i2 - q2));
  return o;
}

Outcome probability_normalization() {
  Outcome o;
  std::mt19937_64 gen(kSeed);
  std::uniform_real_distribution<double> rate(1e-3, 50.0);
  std::uniform_int_distribution<std::int64_t> coord(0, 100000);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const RateParams p(rate(gen), rate(gen), rate(gen), rate(gen), rate(gen));
    const auto pr = jump_probabilities(p, {coord(gen), coord(gen)});
    double s = 0.0;
    for (double v : pr) s += v;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  o.pass = worst < 1e-12;
  o.detail = "max |sum p - 1| = " + fmt("%.2e", worst) + " over 1000 states";
  return o;
}

Outcome quadrant_invariance(std::size_t workers) {
  Outcome o;
  constexpr std::size_t kBatch = 2048;
  std::size_t jumps = 0, replicas = 0;
  std::int64_t min_coord = 0;
  const std::uint64_t seed = derive_seed(kSeed, 3);
  while (jumps < 1000000) {
    std::vector<std::size_t> n(kBatch);
    std::vector<std::int64_t> lo(kBatch);
    parallel_for(kBatch, workers, [&](std::size_t i) {
      RngStream rng(seed, replicas + i);
      const auto u = simulate_xi(kUnit, 1.0 + static_cast<double>((replicas + i) % 20), rng);
      n[i] = u.jump_count();
      std::int64_t m = 0;
      for (const auto& z : u.states()) m = std::min({m, z.z1, z.z2});
      lo[i] = m;
    });
    for (std::size_t i = 0; i < kBatch; ++i) {
      jumps += n[i];
      min_coord = std::min(min_coord, lo[i]);
    }
    replicas += kBatch;
  }
  o.pass = min_coord >= 0;
  o.detail = std::to_string(jumps) + " jumps over " + std::to_string(replicas) +
             " replicas, min coordinate " + std::to_string(min_coord);
  add(o.record, static_cast<double>(jumps));
  add(o.record, static_cast<double>(min_coord));
  return o;
}

Outcome poisson_jump_count(std::size_t workers) {
  Outcome o;
  const std::size_t n = 100000;
  std::vector<double> k(n);
  const std::uint64_t seed = derive_seed(kSeed, 4);
  parallel_for(n, workers, [&](std::size_t i) {
    RngStream rng(seed, i);
    k[i] = static_cast<double>(simulate_zeta(10.0, rng, false).jump_count());
  });
  double s = 0.0;
  for (double v : k) s += v;
  const double mean = s / static_cast<double>(n);
  double ss = 0.0;
  for (double v : k) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(n - 1);
  o.pass = std::abs(mean - 10.0) <= 0.05 && std::abs(var - 10.0) <= 0.4;
  o.detail = "mean N_T = " + fmt("%.4f", mean) + ", variance = " + fmt("%.4f", var);
  add(o.record, mean);
  add(o.record, var);
  return o;
}

Outcome density_decomposition() {
  Outcome o;
  const std::uint64_t seed = derive_seed(kSeed, 5);
  double worst = 0.0;
  int used = 0;
  for (std::uint64_t i = 0; used < 100; ++i) {
    RngStream rng(seed, i);
    const auto u = simulate_zeta(3.0, rng, true);
    if (u.exited()) continue;
    ++used;
    const auto f = path_functionals(kUnit, u);
    const double rhs = 3.0 - f.a_value + f.b_value + static_cast<double>(f.n_jumps) * std::log(5.0);
    worst = std::max(worst, rel(f.log_density, rhs));
  }
  o.pass = worst < 1e-9;
  o.detail = "max relative gap " + fmt("%.2e", worst) + " over 100 in-quadrant reference paths";
  add(o.record, worst);
  return o;
}

Outcome scaled_a_identity() {
  Outcome o;
  const std::uint64_t seed = derive_seed(kSeed, 6);
  const RateParams p(0.7, 1.4, 0.5, 2.2, 1.1);
  const auto tube = EventSpec::tube(kDiag, 0.3);
  double worst = 0.0;
  int count = 0;
  for (std::uint64_t i = 0; count < 1000; ++i) {
    RngStream rng(seed, i);
    const double T = 1.0 + static_cast<double>(i % 10);
    StepTrajectory u;
    switch (i % 4) {
      case 0: u = simulate_xi(p, T, rng); break;
      case 1: u = simulate_zeta(T, rng, true); break;
      case 2: u = simulate_guided(build_guided_proposal(p, kDiag, T, 1e-3), p, rng).trajectory; break;
      default: {
        ProposalOptions opts;
        opts.pieces = 16;
        u = simulate_guided(build_guided_proposal(p, tube, T, opts), p, rng).trajectory;
      }
    }
    if (u.exited()) continue;
    ++count;
    const double lhs = a_functional(p, u);
    const double rhs = T * T * (p.c0() / T + rate_integral(ScaledView(u), p));
    worst = std::max(worst, rel(lhs, rhs));
  }
  o.pass = worst < 1e-9;
  o.detail = "max relative gap " + fmt("%.2e", worst) + " over 1000 paths (xi, reference, two proposals)";
  return o;
}

Outcome change_of_measure(std::size_t workers) {
  Outcome o;
  const auto rep = consistency_check(kUnit, 2.0, 100000, {derive_seed(kSeed, 7), workers});
  o.pass = std::abs(rep.z_score) <= 3.0;
  o.detail = "direct " + fmt("%.5f", rep.direct.p_hat) + ", weighted " + fmt("%.5f", rep.weighted.p_hat) +
             ", z = " + fmt("%.3f", rep.z_score);
  add(o.record, rep.direct);
  add(o.record, rep.weighted);
  add(o.record, rep.z_score);
  return o;
}

Outcome is_unbiasedness(std::size_t workers) {
  Outcome o;
  const auto ev = EventSpec::tube(kDiag, 0.8);
  const auto naive = estimate_event_naive(kUnit, ev, 2.0, 1000000, {derive_seed(kSeed, 80), workers});
  const auto q = build_guided_proposal(kUnit, kDiag, 2.0, 1e-3);
  const auto is = estimate_event_is(kUnit, ev, 2.0, 100000, {derive_seed(kSeed, 81), workers}, q);
  const auto is2 = estimate_event_is(kUnit, ev, 2.0, 100000, {derive_seed(kSeed, 82), workers},
                                     q.with_scaled_up_rates(2.0));
  const double z1 = (is.p_hat - naive.p_hat) / std::hypot(is.std_error, naive.std_error);
  const double z2 = (is2.p_hat - is.p_hat) / std::hypot(is.std_error, is2.std_error);
  o.pass = std::abs(z1) <= 3.0 && std::abs(z2) <= 3.0;
  o.detail = "naive " + fmt("%.5f", naive.p_hat) + ", IS " + fmt("%.5f", is.p_hat) + " (z " +
             fmt("%.2f", z1) + "), IS with 2 alpha " + fmt("%.5f", is2.p_hat) + " (z " + fmt("%.2f", z2) + ")";
  add(o.record, naive);
  add(o.record, is);
  add(o.record, is2);
  return o;
}

Outcome k_plus_majority(std::size_t workers) {
  Outcome o;
  const std::size_t n = 10000;
  const std::uint64_t seed = derive_seed(kSeed, 9);
  std::vector<int> status(n);  // 0 skipped, 1 ok, 2 violation
  parallel_for(n, workers, [&](std::size_t i) {
    RngStream rng(seed, i);
    const auto u = simulate_xi(kUnit, 10.0, rng);
    const auto z = u.final_state();
    if (!(z.z1 > 0 && z.z2 > 0) || !(u.initial_state() == LatticeState{0, 0})) return;
    const auto c = count_up_down(u);
    status[i] = 2 * c.k_plus > u.jump_count() ? 1 : 2;
  });
  std::size_t checked = 0, bad = 0;
  for (int s : status) {
    checked += s != 0;
    bad += s == 2;
  }
  o.pass = bad == 0 && checked > 0;
  o.detail = std::to_string(bad) + " violations among " + std::to_string(checked) +
             " trajectories ending in the open quadrant";
  add(o.record, static_cast<double>(checked));
  add(o.record, static_cast<double>(bad));
  return o;
}

Outcome lemma_bound(std::size_t workers) {
  Outcome o;
  const double T = 10.0, eps = 0.3;
  const auto tube = EventSpec::tube(kDiag, eps);
  const GuidedSampler sample(build_guided_proposal(kUnit, tube, T, ProposalOptions{}), kUnit);
  const std::uint64_t seed = derive_seed(kSeed, 10);
  constexpr std::size_t kBatch = 4096;
  std::size_t in_tube = 0, bad = 0, next = 0;
  double worst_margin = INFINITY;
  while (in_tube < 10000) {
    std::vector<int> status(kBatch);  // 0 outside the tube, 1 ok, 2 violation
    std::vector<double> margin(kBatch, INFINITY);
    parallel_for(kBatch, workers, [&](std::size_t i) {
      RngStream rng(seed, next + i);
      const auto u = sample(rng).trajectory;
      if (!in_event(u, tube)) return;
      const auto b = lemma_bt_bound_check(kUnit, u, kDiag, eps);
      status[i] = b.holds ? 1 : 2;
      margin[i] = b.rhs - b.lhs;
    });
    for (std::size_t i = 0; i < kBatch && in_tube < 10000; ++i) {
      if (status[i] == 0) continue;
      ++in_tube;
      bad += status[i] == 2;
      worst_margin = std::min(worst_margin, margin[i]);
    }
    next += kBatch;
  }
  o.pass = bad == 0;
  o.detail = std::to_string(bad) + " violations over " + std::to_string(in_tube) +
             " tube paths, smallest margin rhs - lhs = " + fmt("%.3f", worst_margin);
  add(o.record, static_cast<double>(bad));
  add(o.record, worst_margin);
  return o;
}

struct TrendCheck {
  bool closer = false;
  bool slope_ok = false;
  std::string text;
};

// Criterion 11's test applied to one study.
TrendCheck trend(const ScalingStudyResult& s, std::string& record) {
  TrendCheck t;
  double n8 = NAN, n16 = NAN;
  t.text = "normalized";
  for (const auto& row : s.rows) {
    if (row.horizon == 8.0) n8 = row.estimate.normalized;
    if (row.horizon == 16.0) n16 = row.estimate.normalized;
    t.text += " T=" + fmt("%g", row.horizon) + ":" + fmt("%.4f", row.estimate.normalized) +
              "(ess " + fmt("%.0f", row.estimate.ess) + ")";
    add(record, row.estimate);
  }
  add(record, s.free_fit.slope);
  add(record, s.free_fit.intercept);
  t.closer = std::abs(n16 - 1.5) < std::abs(n8 - 1.5);
  t.slope_ok = s.free_fit.valid && s.free_fit.slope >= 0.75 && s.free_fit.slope <= 2.4;
  t.text += "; |n16-1.5| = " + fmt("%.4f", std::abs(n16 - 1.5)) + " vs |n8-1.5| = " +
            fmt("%.4f", std::abs(n8 - 1.5)) + (t.closer ? " (closer)" : " (NOT closer)") +
            "; free slope " + fmt("%.4f", s.free_fit.slope) + (t.slope_ok ? " in" : " NOT in") +
            " [0.75, 2.4]";
  return t;
}

const std::vector<double> kHorizons = {4.0, 8.0, 12.0, 16.0};

std::string oracle_note(const EventSpec& ev) {
  std::string s = "; exact forward-equation values";
  for (double T : kHorizons) {
    s += " T=" + fmt("%g", T) + ":" + fmt("%.4f", -std::log(oracle::event_probability(kUnit, ev, T)) / (T * T));
  }
  return s;
}

Outcome ldp_trend(std::size_t workers, bool with_oracle) {
  Outcome o;
  const auto s = scaling_study(kUnit, kDiag, 0.3, kHorizons, 100000, {derive_seed(kSeed, 11), workers});
  const auto t = trend(s, o.record);
  o.pass = t.closer && t.slope_ok;
  o.detail = t.text;
  if (with_oracle) o.detail += oracle_note(EventSpec::tube(kDiag, 0.3));
  return o;
}

Outcome strip_consistency(std::size_t workers, bool with_oracle) {
  Outcome o;
  const auto tube = EventSpec::tube(kDiag, 0.3);
  const auto strip = EventSpec::strip(kDiag, 0.3, 2.0);
  bool ordered = true;
  for (std::size_t k = 0; k < kHorizons.size(); ++k) {
    const double T = kHorizons[k];
    const auto q = build_guided_proposal(kUnit, tube, T, ProposalOptions{});
    const auto r = estimate_events_is(kUnit, {tube, strip}, T, 20000,
                                      {derive_seed(derive_seed(kSeed, 120), k), workers}, q);
    ordered &= r[1].p_hat >= r[0].p_hat && r[1].n_hits >= r[0].n_hits;
    add(o.record, r[0]);
    add(o.record, r[1]);
  }
  const auto s = scaling_study(kUnit, {strip}, kHorizons, 100000, {derive_seed(kSeed, 121), workers}).front();
  const auto t = trend(s, o.record);
  o.pass = ordered && t.closer && t.slope_ok;
  o.detail = std::string(ordered ? "strip >= tube on shared replicas at every T" : "strip < tube somewhere") +
             "; strip " + t.text;
  if (with_oracle) o.detail += oracle_note(strip);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome(std::size_t, bool)> run;
};

}  // namespace

int main() {
  const std::size_t workers = std::max<std::size_t>(2, default_workers());
  const std::vector<Criterion> criteria = {
      {1, "rate functional exactness", 1, [](std::size_t, bool) { return rate_exactness(); }},
      {2, "probability normalization", 1, [](std::size_t, bool) { return probability_normalization(); }},
      {3, "quadrant invariance", 10, [](std::size_t w, bool) { return quadrant_invariance(w); }},
      {4, "Poisson jump count", 30, [](std::size_t w, bool) { return poisson_jump_count(w); }},
      {5, "density decomposition", 1, [](std::size_t, bool) { return density_decomposition(); }},
      {6, "scaled A_T identity", 5, [](std::size_t, bool) { return scaled_a_identity(); }},
      {7, "change-of-measure consistency", 60, [](std::size_t w, bool) { return change_of_measure(w); }},
      {8, "IS unbiasedness", 120, [](std::size_t w, bool) { return is_unbiasedness(w); }},
      {9, "K+ majority", 0, [](std::size_t w, bool) { return k_plus_majority(w); }},
      {10, "explicit B_T bound", 0, [](std::size_t w, bool) { return lemma_bound(w); }},
      {11, "LDP trend", 600, [](std::size_t w, bool x) { return ldp_trend(w, x); }},
      {12, "strip consistency", 0, [](std::size_t w, bool x) { return strip_consistency(w, x); }},
  };

  int failures = 0;
  std::vector<std::string> records(criteria.size());
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto& cr = criteria[c];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = cr.run(workers, true);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = cr.budget_s <= 0 || sec < cr.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    records[c] = o.record;
    std::printf("[%s] %2d %s: %s; %.2fs%s\n", pass ? "PASS" : "FAIL", cr.id, cr.name, o.detail.c_str(),
                sec, in_time ? "" : " (over time budget)");
    std::fflush(stdout);
  }

  // 13: criteria 3-12 again on one worker, same seeds
  bool identical = true;
  std::string diffs;
  for (std::size_t c = 2; c < criteria.size(); ++c) {
    const Outcome o = criteria[c].run(1, false);
    if (o.record != records[c]) {
      identical = false;
      diffs += " " + std::to_string(criteria[c].id);
    }
  }
  failures += !identical;
  std::printf("[%s] 13 determinism: criteria 3-12 rerun with 1 vs %zu workers %s\n",
              identical ? "PASS" : "FAIL", workers,
              identical ? "are byte-identical" : ("differ in:" + diffs).c_str());
  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
