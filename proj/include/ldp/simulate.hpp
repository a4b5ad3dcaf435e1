#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ldp/model.hpp"
#include "ldp/paths.hpp"
#include "ldp/rng.hpp"

namespace ldp {

/// Exact event-driven simulation of the quadrant process from (0, 0) up to horizon T.
StepTrajectory simulate_xi(const RateParams& params, double horizon, RngStream& rng);

/// Reference walk on Z^2: rate-1 holding times, each of the five jumps with probability 1/5.
/// With stop_on_exit the path ends at its first exit from the quadrant and is flagged.
StepTrajectory simulate_zeta(double horizon, RngStream& rng, bool stop_on_exit);

/// How a guided proposal chooses its intensities.
///
/// drift_matched: on each piece the up-rates are constants alpha_i with
///   alpha_i - c_i z_i - c3 min{z1, z2} = f_i' at z = T fbar (fbar the piece midpoint value),
///   floored at alpha_min; down-intensities are those of the quadrant process.
///
/// h_transform: every intensity of the quadrant process is multiplied by q(z + y) / q(z),
///   where q(., t) is the probability of staying in the event from state z at time t,
///   obtained from the backward equation on a finite box and frozen at each piece midpoint.
///   Multipliers are clamped to [ratio_floor, 1 / ratio_floor].
enum class ProposalKind { drift_matched, h_transform };

std::string to_string(ProposalKind kind);
ProposalKind proposal_kind_from_string(const std::string& name);

struct ProposalOptions {
  ProposalKind kind = ProposalKind::h_transform;
  double alpha_min = 1e-3;
  /// Uniform refinement of [0, 1], merged with the target's own breakpoints.
  /// 0 picks max(64, ceil(16 T)).
  std::size_t pieces = 0;
  double ratio_floor = 1e-6;
};

/// One time piece [begin, end) of a proposal, in unscaled time.
struct ProposalPiece {
  double begin = 0.0;
  double end = 0.0;
  /// Constant up-intensities; used when `multipliers` is empty.
  double up1 = 0.0;
  double up2 = 0.0;
  /// Per-state multipliers on the quadrant process's five intensities, row-major over
  /// [0, extent)^2 (z1 major). Outside the box the multipliers are 1.
  std::vector<std::array<double, kJumpCount>> multipliers;
  /// Extra factor on the up-intensities of a tabulated piece.
  double up_scale = 1.0;

  bool tabulated() const { return !multipliers.empty(); }
};

/// Time-inhomogeneous jump law with the quadrant process's support, used as an
/// importance-sampling proposal.
class GuidedProposal {
 public:
  GuidedProposal(double horizon, std::vector<ProposalPiece> pieces, double alpha_min,
                 std::int64_t extent = 0);

  /// The quadrant process itself: one constant piece with the original intensities.
  static GuidedProposal identity(const RateParams& params, double horizon);

  double horizon() const { return horizon_; }
  double alpha_min() const { return alpha_min_; }
  std::int64_t extent() const { return extent_; }
  const std::vector<ProposalPiece>& pieces() const { return pieces_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  /// Every up-intensity multiplied by `factor`, down-intensities unchanged.
  GuidedProposal with_scaled_up_rates(double factor) const;

  /// Index of the piece containing unscaled time t.
  std::size_t piece_at(double t) const;

 private:
  double horizon_;
  std::vector<ProposalPiece> pieces_;
  double alpha_min_;
  std::int64_t extent_;
  std::vector<std::string> warnings_;
};

/// Drift-matched proposal with one piece per linear segment of the target.
GuidedProposal build_guided_proposal(const RateParams& params, const PiecewiseLinearPath& target,
                                     double horizon, double alpha_min);

/// Proposal for an event; drift-matched proposals only use the event's target.
GuidedProposal build_guided_proposal(const RateParams& params, const EventSpec& event,
                                     double horizon, const ProposalOptions& options);

struct GuidedSample {
  StepTrajectory trajectory;
  /// log(dP_xi / dQ) of the sampled path.
  double log_weight = 0.0;
};

/// A proposal compiled against fixed rates: intensity and log-ratio tables built once,
/// then shared by any number of draws (const, thread-safe).
class GuidedSampler {
 public:
  GuidedSampler(const GuidedProposal& proposal, const RateParams& params);

  GuidedSample operator()(RngStream& rng) const;
  /// log(dP_xi / dQ) for a quadrant path.
  double log_weight(const StepTrajectory& traj) const;

 private:
  struct Local {
    std::array<double, kJumpCount> rate;
    std::array<double, kJumpCount> log_ratio;
    double total;
    // h^Q - h^xi at this state
    double diff;
  };
  struct Piece {
    double end;
    double up1, up2;
    double log_up1, log_up2;
    double up_scale;
    std::vector<Local> table;
  };

  Local local(const Piece& piece, LatticeState z) const;

  RateParams params_;
  double horizon_;
  std::int64_t extent_;
  std::vector<Piece> pieces_;
};

/// One draw; builds a GuidedSampler each call, so prefer the sampler for repeated draws.
GuidedSample simulate_guided(const GuidedProposal& proposal, const RateParams& params,
                             RngStream& rng);

/// log(dP_xi / dQ) for an arbitrary quadrant path under the given proposal.
double guided_log_weight(const GuidedProposal& proposal, const RateParams& params,
                         const StepTrajectory& traj);

/// Appends `replica,time,z1,z2` rows: the initial state then one row per jump.
void write_trajectory_csv(std::ostream& out, std::size_t replica, const StepTrajectory& traj);

}  // namespace ldp
