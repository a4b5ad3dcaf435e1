#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ldp/estimate.hpp"
#include "ldp/model.hpp"
#include "ldp/paths.hpp"
#include "ldp/simulate.hpp"

namespace ldp {

/// Raised for unreadable, malformed or invalid configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment, as read from a JSON file. Absent keys keep these defaults.
struct ExperimentConfig {
  RateParams rates = RateParams::unit();
  PiecewiseLinearPath target = PiecewiseLinearPath::diagonal();
  double epsilon = 0.3;
  std::optional<double> upper;  // M; required for strip events
  EventKind event = EventKind::tube;
  std::optional<double> horizon;
  std::vector<double> horizons = {4.0, 8.0, 12.0, 16.0};
  std::size_t n_replicas = 100000;
  std::uint64_t master_seed = 0;
  Method method = Method::guided_is;
  ProposalOptions proposal;
  std::string output_dir = "ldp-out";
  /// Exact bytes the config was parsed from; hashed into run manifests.
  std::string source;
};

/// Parses and validates. Throws ConfigError naming the first problem found.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Rates positive, target admissible (F1, F2, ordering), epsilon > 0, M > sup f,
/// horizons positive and strictly increasing, n >= 1.
void validate_config(const ExperimentConfig& config);

EventSpec make_event(const ExperimentConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ldp
