#include <cstdint>
#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "ldp/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Excursion probabilities of a two-dimensional lattice jump process"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir, method;
  ldp::RunOptions opts;

  app.add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed; overrides LDP_SEED and the config");
  app.add_option("--workers", opts.workers, "worker threads (0 = hardware concurrency)")
      ->default_val(1);
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  app.add_flag("--dump", opts.dump, "simulate: write trajectories.csv");
  app.add_flag("--reference", opts.reference, "simulate: use the reference walk");
  app.add_flag("--stop-on-exit", opts.stop_on_exit,
               "simulate: stop reference paths at the first quadrant exit");
  auto* method_opt = app.add_option("--method", method, "naive | guided-is | zeta-weighted");

  const std::pair<const char*, const char*> commands[] = {
      {"validate", "check the config and print the rate constants"},
      {"rate", "evaluate I(f) and the strip infimum"},
      {"simulate", "simulate trajectories of xi (or zeta with --reference)"},
      {"estimate", "estimate the event probability at T"},
      {"scaling", "estimate -ln p / T^2 over T_list and fit the slope"},
      {"consistency", "compare direct and zeta-weighted estimates of a bounded event"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : ldp::kExitConfig;
  }
  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out_dir = out_dir;
  if (*method_opt) opts.method = method;

  const std::string command = app.get_subcommands().front()->get_name();
  return ldp::run_command(command, config, opts, std::cout, std::cerr);
}
