#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ldp/estimate.hpp"
#include "ldp/rng.hpp"
#include "oracle/forward_equation.hpp"

using namespace ldp;

namespace {

const auto kUnit = RateParams::unit();
const auto kDiag = PiecewiseLinearPath::diagonal();

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

double combined_z(const EstimateResult& a, const EstimateResult& b) {
  return (a.p_hat - b.p_hat) / std::hypot(a.std_error, b.std_error);
}

}  // namespace

TEST_CASE("naive: a tube wider than every path is almost sure") {
  const PiecewiseLinearPath f({{0, 0, 0}, {0.5, 5, 2}, {1, 3, 4}});
  const auto r = estimate_event_naive(kUnit, EventSpec::tube(f, 10.0), 5.0, 10000, {1, 4});
  CHECK(r.p_hat >= 0.99);
  CHECK(r.method == Method::naive);
  CHECK(r.std_error == doctest::Approx(std::sqrt(r.p_hat * (1 - r.p_hat) / 10000)));
}

TEST_CASE("naive: the thin diagonal tube at T = 4 is out of reach and flagged") {
  const auto r = estimate_event_naive(kUnit, EventSpec::tube(kDiag, 0.3), 4.0, 1000000, {2, 8});
  CHECK(r.zero_hits());
  CHECK(r.log_p_hat == -INFINITY);
  CHECK(std::isnan(r.normalized));
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("naive: reported standard error matches the spread over reruns") {
  const auto ev = EventSpec::tube(kDiag, 0.8);
  std::vector<double> ps;
  double se = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto r = estimate_event_naive(kUnit, ev, 2.0, 5000, {derive_seed(3, k), 4});
    ps.push_back(r.p_hat);
    se += r.std_error / 20.0;
  }
  double m = 0.0, v = 0.0;
  for (double p : ps) m += p / 20.0;
  for (double p : ps) v += (p - m) * (p - m) / 19.0;
  CHECK(std::sqrt(v) < 2.0 * se);
  CHECK(std::sqrt(v) > 0.5 * se);
}

TEST_CASE("strip estimates dominate tube estimates on shared replicas") {
  const auto tube = EventSpec::tube(kDiag, 0.5);
  const auto strip = EventSpec::strip(kDiag, 0.5, 1.5);
  const auto naive = estimate_events_naive(kUnit, {tube, strip}, 3.0, 20000, {4, 4});
  CHECK(naive[1].n_hits >= naive[0].n_hits);
  CHECK(naive[1].p_hat >= naive[0].p_hat);

  ProposalOptions o;
  const auto q = build_guided_proposal(kUnit, tube, 3.0, o);
  const auto is = estimate_events_is(kUnit, {tube, strip}, 3.0, 20000, {5, 4}, q);
  CHECK(is[1].n_hits >= is[0].n_hits);
  CHECK(is[1].p_hat >= is[0].p_hat);
  CHECK(is[1].log_p_hat >= is[0].log_p_hat);
}

TEST_CASE("identity proposal reproduces the naive estimator") {
  const auto ev = EventSpec::tube(kDiag, 0.8);
  const auto naive = estimate_event_naive(kUnit, ev, 2.0, 20000, {6, 4});
  const auto is = estimate_event_is(kUnit, ev, 2.0, 20000, {6, 4}, GuidedProposal::identity(kUnit, 2.0));
  CHECK(is.n_hits == naive.n_hits);
  CHECK(is.p_hat == doctest::Approx(naive.p_hat).epsilon(1e-14));
  CHECK(is.method == Method::guided_is);
}

TEST_CASE("importance sampling agrees with the forward-equation oracle") {
  const auto ev = EventSpec::tube(kDiag, 0.3);
  const double exact = oracle::event_probability(kUnit, ev, 4.0);
  const auto q = build_guided_proposal(kUnit, ev, 4.0, ProposalOptions{});
  const auto r = estimate_event_is(kUnit, ev, 4.0, 20000, {7, 4}, q);
  CHECK(std::abs(r.p_hat - exact) < 4.0 * r.std_error);
  CHECK(r.std_error < 0.1 * r.p_hat);
  CHECK(r.ess > 10.0);

  const auto strip = EventSpec::strip(kDiag, 0.3, 2.0);
  const double exact_strip = oracle::event_probability(kUnit, strip, 4.0);
  const auto s = estimate_strip(kUnit, kDiag, 0.3, 2.0, 4.0, 20000, {8, 4});
  CHECK(std::abs(s.estimate.p_hat - exact_strip) < 4.0 * s.estimate.std_error);
  CHECK(s.strip_inf_rate == 1.5);
}

TEST_CASE("reference-walk estimator agrees with crude Monte Carlo") {
  const auto ev = EventSpec::strip(kDiag, 0.8, 2.0);
  // short horizon: the reference-walk weights are heavy-tailed once T grows
  const auto naive = estimate_event_naive(kUnit, ev, 0.5, 100000, {9, 8});
  const auto zeta = estimate_event_zeta(kUnit, ev, 0.5, 100000, {10, 8});
  CHECK(zeta.ess > 100.0);
  CHECK(zeta.method == Method::zeta_weighted);
  CHECK(std::abs(combined_z(naive, zeta)) < 3.5);
}

TEST_CASE("ESS below 10 is reported") {
  const auto ev = EventSpec::tube(kDiag, 0.3);
  const auto q = build_guided_proposal(kUnit, kDiag, 12.0, 1e-3);
  const auto r = estimate_event_is(kUnit, ev, 12.0, 2000, {11, 4}, q);
  bool warned = false;
  for (const auto& w : r.warnings) warned |= w.find("effective sample size") != std::string::npos;
  CHECK(warned == (r.n_hits > 0 && r.ess < 10.0));
}

TEST_CASE("estimates do not depend on the worker count") {
  const auto ev = EventSpec::tube(kDiag, 0.3);
  const auto q = build_guided_proposal(kUnit, ev, 6.0, ProposalOptions{});
  const auto a = estimate_event_is(kUnit, ev, 6.0, 3000, {12, 1}, q);
  for (std::size_t w : {2u, 3u, 8u}) {
    const auto b = estimate_event_is(kUnit, ev, 6.0, 3000, {12, w}, q);
    CHECK(bit_equal(a.p_hat, b.p_hat));
    CHECK(bit_equal(a.std_error, b.std_error));
    CHECK(bit_equal(a.ess, b.ess));
  }
}

TEST_CASE("consistency check at a short horizon") {
  const auto rep = consistency_check(kUnit, 0.5, 50000, {13, 4});
  CHECK(std::abs(rep.z_score) < 3.5);
  CHECK(std::abs(rep.total_mass.p_hat - 1.0) < 4.0 * rep.total_mass.std_error + 1e-12);
  CHECK(rep.direct.p_hat > 0.9);
}

TEST_CASE("least-squares fits against T^2") {
  const std::vector<double> T = {4, 8, 12, 16};
  std::vector<double> y;
  for (double t : T) y.push_back(3.0 + 1.5 * t * t);
  const auto [free_fit, zero_fit] = fit_against_t_squared(T, y);
  CHECK(free_fit.valid);
  CHECK(free_fit.slope == doctest::Approx(1.5));
  CHECK(free_fit.intercept == doctest::Approx(3.0));
  CHECK(zero_fit.slope > 1.5);
}

TEST_CASE("scaling study input checks") {
  CHECK_THROWS_AS(scaling_study(kUnit, kDiag, 0.3, {4.0}, 10, {}), std::invalid_argument);
  CHECK_THROWS_AS(scaling_study(kUnit, kDiag, 0.3, {8.0, 4.0}, 10, {}), std::invalid_argument);
}

TEST_CASE("scaling study rows, fit and rate homogeneity") {
  const auto s1 = scaling_study(kUnit, kDiag, 0.3, {3.0, 5.0}, 5000, {14, 4});
  REQUIRE(s1.rows.size() == 2);
  CHECK(s1.rows[0].horizon == 3.0);
  CHECK(s1.target_rate == 1.5);
  CHECK(s1.free_fit.valid);
  for (const auto& row : s1.rows) CHECK(row.in_fit);

  const auto s2 = scaling_study(kUnit.scaled(2.0), kDiag, 0.3, {3.0, 5.0}, 5000, {14, 4});
  CHECK(s2.target_rate == 3.0);
  CHECK(s2.fitted_slope() > s1.fitted_slope());
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::naive, Method::zeta_weighted, Method::guided_is}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(method_from_string("exact"), std::invalid_argument);
}
