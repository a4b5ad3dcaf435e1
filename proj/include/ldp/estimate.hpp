#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ldp/model.hpp"
#include "ldp/paths.hpp"
#include "ldp/simulate.hpp"

namespace ldp {

enum class Method { naive, zeta_weighted, guided_is };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// Replica i of an estimator draws from RngStream(seed, i).
struct McOptions {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct EstimateResult {
  double p_hat = 0.0;
  double log_p_hat = 0.0;
  double std_error = 0.0;
  /// ln(std_error); stays finite when std_error underflows.
  double log_std_error = 0.0;
  std::size_t n_replicas = 0;
  std::size_t n_hits = 0;
  Method method = Method::naive;
  double horizon = 0.0;
  /// -log_p_hat / T^2; NaN when there are no hits.
  double normalized = 0.0;
  /// sum(w) / max(w) over hits.
  double ess = 0.0;
  std::vector<std::string> warnings;

  bool zero_hits() const { return n_hits == 0; }
};

/// Crude Monte Carlo over quadrant-process replicas.
EstimateResult estimate_event_naive(const RateParams& params, const EventSpec& event,
                                    double horizon, std::size_t n, const McOptions& mc);

/// Importance sampling under an arbitrary guided proposal.
EstimateResult estimate_event_is(const RateParams& params, const EventSpec& event,
                                 double horizon, std::size_t n, const McOptions& mc,
                                 const GuidedProposal& proposal);

/// Reference-walk estimator e^T E_zeta[dP_xi/dP_zeta; E] (exited replicas weigh 0).
EstimateResult estimate_event_zeta(const RateParams& params, const EventSpec& event,
                                   double horizon, std::size_t n, const McOptions& mc);

/// Shared-replica variants: every event is evaluated on the same trajectories and the
/// weights share one log-domain shift, so nested events give ordered estimates exactly.
std::vector<EstimateResult> estimate_events_naive(const RateParams& params,
                                                  const std::vector<EventSpec>& events,
                                                  double horizon, std::size_t n,
                                                  const McOptions& mc);
std::vector<EstimateResult> estimate_events_is(const RateParams& params,
                                               const std::vector<EventSpec>& events,
                                               double horizon, std::size_t n,
                                               const McOptions& mc,
                                               const GuidedProposal& proposal);

struct StripEstimate {
  EstimateResult estimate;
  double strip_inf_rate = 0.0;
};

EstimateResult estimate_strip_naive(const RateParams& params, const PiecewiseLinearPath& target,
                                    double epsilon, double upper, double horizon, std::size_t n,
                                    const McOptions& mc);

StripEstimate estimate_strip(const RateParams& params, const PiecewiseLinearPath& target,
                             double epsilon, double upper, double horizon, std::size_t n,
                             const McOptions& mc, const ProposalOptions& proposal = {});

struct ConsistencyReport {
  double horizon = 0.0;
  std::size_t n = 0;
  EstimateResult direct;
  EstimateResult weighted;
  /// Weighted estimate of the whole in-quadrant event; a probability law gives 1.
  EstimateResult total_mass;
  double z_score = 0.0;
};

/// Event E = {N_T <= 8, path in the quadrant, final state in [0, 4]^2}, estimated directly
/// and through the reference walk. Sub-streams derive_seed(seed, 1) and derive_seed(seed, 2).
ConsistencyReport consistency_check(const RateParams& params, double horizon, std::size_t n,
                                    const McOptions& mc);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool valid = false;
};

struct ScalingRow {
  double horizon = 0.0;
  EstimateResult estimate;
  bool in_fit = false;
};

struct ScalingStudyResult {
  std::vector<ScalingRow> rows;
  /// -ln p_hat = intercept + slope T^2
  LinearFit free_fit;
  /// -ln p_hat = slope T^2
  LinearFit zero_fit;
  double target_rate = 0.0;
  std::vector<std::string> warnings;

  double fitted_slope() const { return free_fit.slope; }
};

/// Ordinary least squares with and without intercept; needs two or more points.
std::pair<LinearFit, LinearFit> fit_against_t_squared(const std::vector<double>& horizons,
                                                      const std::vector<double>& neg_log_p);

/// Guided-IS estimates of the tube probability for each T; replica streams for the
/// k-th horizon use derive_seed(seed, k).
ScalingStudyResult scaling_study(const RateParams& params, const PiecewiseLinearPath& target,
                                 double epsilon, const std::vector<double>& horizons,
                                 std::size_t n, const McOptions& mc,
                                 const ProposalOptions& proposal = {});

/// One study per event, each with a proposal built for that event; replica streams for
/// the k-th horizon use derive_seed(seed, k).
std::vector<ScalingStudyResult> scaling_study(const RateParams& params,
                                              const std::vector<EventSpec>& events,
                                              const std::vector<double>& horizons,
                                              std::size_t n, const McOptions& mc,
                                              const ProposalOptions& proposal = {});

}  // namespace ldp
