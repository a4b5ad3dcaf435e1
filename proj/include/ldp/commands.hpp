#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "ldp/config.hpp"

namespace ldp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
/// Consistency z-score above 4.
inline constexpr int kExitInconsistent = 3;

/// Command-line overrides. Unset fields fall back to the environment, then the config.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::optional<std::string> out_dir;
  bool dump = false;
  bool reference = false;
  bool stop_on_exit = false;
  std::optional<std::string> method;
};

/// Flag, then LDP_SEED, then master_seed. Throws ConfigError on an unparsable LDP_SEED.
std::uint64_t resolve_seed(const RunOptions& opts, const ExperimentConfig& config);

int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_rate(const ExperimentConfig& config, std::ostream& out);
int cmd_simulate(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int cmd_estimate(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int cmd_scaling(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);
int cmd_consistency(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out);

/// Loads the config and dispatches by subcommand name, mapping errors to exit codes.
int run_command(const std::string& command, const std::string& config_path,
                const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace ldp
