#include "ldp/commands.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ldp/estimate.hpp"
#include "ldp/functional.hpp"
#include "ldp/parallel.hpp"
#include "ldp/rng.hpp"
#include "ldp/simulate.hpp"

#ifndef LDP_VERSION
#define LDP_VERSION "0.0.0"
#endif

namespace ldp {

namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kCsvHeader = "T,p_hat,log_p_hat,std_error,n,n_hits,normalized,method";
constexpr std::size_t kDumpBatch = 4096;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Non-finite values become null.
ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::filesystem::path output_dir(const ExperimentConfig& c, const RunOptions& o) {
  std::filesystem::path dir = o.out_dir ? *o.out_dir : c.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const ExperimentConfig& c, std::uint64_t seed) {
  ojson m;
  m["command"] = command;
  m["version"] = LDP_VERSION;
  m["config_hash"] = "fnv1a64:" + hex64(fnv1a64(c.source));
  m["seed"] = seed;
  m["libraries"] = {{"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["timestamp"] = utc_timestamp();
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

std::string csv_row(const EstimateResult& r) {
  return g17(r.horizon) + "," + g17(r.p_hat) + "," + g17(r.log_p_hat) + "," + g17(r.std_error) +
         "," + std::to_string(r.n_replicas) + "," + std::to_string(r.n_hits) + "," +
         g17(r.normalized) + "," + to_string(r.method) + "\n";
}

ojson result_json(const EstimateResult& r) {
  ojson j;
  j["T"] = r.horizon;
  j["p_hat"] = r.p_hat;
  j["log_p_hat"] = num(r.log_p_hat);
  j["std_error"] = r.std_error;
  j["log_std_error"] = num(r.log_std_error);
  j["n"] = r.n_replicas;
  j["n_hits"] = r.n_hits;
  j["zero_hits"] = r.zero_hits();
  j["normalized"] = num(r.normalized);
  j["method"] = to_string(r.method);
  j["ess"] = r.ess;
  j["warnings"] = r.warnings;
  return j;
}

ojson fit_json(const LinearFit& f) {
  return {{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"valid", f.valid}};
}

std::size_t workers(const RunOptions& o) { return o.workers == 0 ? default_workers() : o.workers; }

double require_horizon(const ExperimentConfig& c, const char* command) {
  if (!c.horizon) throw ConfigError(std::string(command) + " needs T in the config");
  return *c.horizon;
}

Method effective_method(const ExperimentConfig& c, const RunOptions& o) {
  if (!o.method) return c.method;
  try {
    return method_from_string(*o.method);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--method: ") + e.what());
  }
}

void print_estimate(std::ostream& out, const EstimateResult& r) {
  out << "T = " << g17(r.horizon) << "  method = " << to_string(r.method) << "\n"
      << "p_hat = " << g17(r.p_hat) << "  log_p_hat = " << g17(r.log_p_hat)
      << "  std_error = " << g17(r.std_error) << "\n"
      << "hits = " << r.n_hits << " / " << r.n_replicas << "  normalized = " << g17(r.normalized)
      << "  ess = " << g17(r.ess) << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
}

}  // namespace

std::uint64_t resolve_seed(const RunOptions& opts, const ExperimentConfig& config) {
  if (opts.seed) return *opts.seed;
  if (const char* env = std::getenv("LDP_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || *env == '-') {
      throw ConfigError("LDP_SEED must be an unsigned 64-bit integer");
    }
    return v;
  }
  return config.master_seed;
}

int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  ExperimentConfig c;
  try {
    c = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto& r = c.rates;
  out << "config ok\n"
      << "c0 = " << g17(r.c0()) << "\nc1 = " << g17(r.c1()) << "\nc2 = " << g17(r.c2())
      << "\nc3 = " << g17(r.c3()) << "\n"
      << "I = " << g17(rate_functional(c.target, r)) << "\n"
      << "sup f = " << g17(c.target.sup_max()) << "\n";
  return kExitOk;
}

int cmd_rate(const ExperimentConfig& c, std::ostream& out) {
  out << "I = " << g17(rate_functional(c.target, c.rates)) << "\n";
  if (c.upper) {
    out << "strip_inf (M = " << g17(*c.upper) << ") = "
        << g17(strip_inf_rate(c.target, *c.upper, c.rates)) << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const ExperimentConfig& c, const RunOptions& o, std::ostream& out) {
  const double T = require_horizon(c, "simulate");
  const std::uint64_t seed = resolve_seed(o, c);
  const auto dir = output_dir(c, o);
  const std::size_t n = c.n_replicas;

  std::ofstream dump;
  if (o.dump) {
    dump.open(dir / "trajectories.csv", std::ios::binary);
    if (!dump) throw std::runtime_error("cannot write trajectory dump");
    dump << "replica,time,z1,z2\n";
  }
  double total_jumps = 0.0;
  std::int64_t max_coord = 0;
  std::size_t exited = 0;
  std::vector<StepTrajectory> batch;
  for (std::size_t start = 0; start < n; start += kDumpBatch) {
    const std::size_t m = std::min(kDumpBatch, n - start);
    batch.assign(m, StepTrajectory());
    parallel_for(m, workers(o), [&](std::size_t i) {
      RngStream rng(seed, start + i);
      batch[i] = o.reference ? simulate_zeta(T, rng, o.stop_on_exit)
                             : simulate_xi(c.rates, T, rng);
    });
    for (std::size_t i = 0; i < m; ++i) {
      const auto& traj = batch[i];
      total_jumps += static_cast<double>(traj.jump_count());
      for (const auto& z : traj.states()) max_coord = std::max({max_coord, z.z1, z.z2});
      exited += traj.exited() ? 1 : 0;
      if (o.dump) write_trajectory_csv(dump, start + i, traj);
    }
  }
  const double mean_jumps = total_jumps / static_cast<double>(n);
  ojson s;
  s["process"] = o.reference ? "reference" : "xi";
  s["T"] = T;
  s["n"] = n;
  s["stop_on_exit"] = o.reference && o.stop_on_exit;
  s["mean_jumps"] = mean_jumps;
  s["max_coordinate"] = max_coord;
  if (o.reference && o.stop_on_exit) {
    s["exited_fraction"] = static_cast<double>(exited) / static_cast<double>(n);
  }
  write_file(dir / "simulate.json", s.dump(2) + "\n");
  write_manifest(dir, "simulate", c, seed);

  out << "simulated " << n << (o.reference ? " reference-walk" : "") << " replicas, T = " << g17(T)
      << "\nmean N_T = " << g17(mean_jumps) << "\nmax coordinate = " << max_coord << "\n";
  if (o.reference && o.stop_on_exit) {
    out << "exited fraction = " << g17(static_cast<double>(exited) / static_cast<double>(n))
        << "\n";
  } else if (o.stop_on_exit) {
    out << "warning: --stop-on-exit only affects --reference runs\n";
  }
  return kExitOk;
}

int cmd_estimate(const ExperimentConfig& c, const RunOptions& o, std::ostream& out) {
  const double T = require_horizon(c, "estimate");
  const Method method = effective_method(c, o);
  const std::uint64_t seed = resolve_seed(o, c);
  const McOptions mc{seed, workers(o)};
  const EventSpec event = make_event(c);

  EstimateResult r;
  switch (method) {
    case Method::naive: r = estimate_event_naive(c.rates, event, T, c.n_replicas, mc); break;
    case Method::zeta_weighted: r = estimate_event_zeta(c.rates, event, T, c.n_replicas, mc); break;
    case Method::guided_is: {
      const auto q = build_guided_proposal(c.rates, event, T, c.proposal);
      r = estimate_event_is(c.rates, event, T, c.n_replicas, mc, q);
      break;
    }
  }
  const auto dir = output_dir(c, o);
  write_file(dir / "estimate.csv", std::string(kCsvHeader) + "\n" + csv_row(r));
  ojson j;
  j["event"] = c.event == EventKind::tube ? "tube" : "strip";
  j["epsilon"] = c.epsilon;
  if (c.upper) j["M"] = *c.upper;
  if (method == Method::guided_is) j["proposal"] = to_string(c.proposal.kind);
  j["rate_functional"] = num(rate_functional(c.target, c.rates));
  if (c.event == EventKind::strip) j["strip_inf_rate"] = strip_inf_rate(c.target, *c.upper, c.rates);
  j["estimate"] = result_json(r);
  write_file(dir / "estimate.json", j.dump(2) + "\n");
  write_manifest(dir, "estimate", c, seed);
  print_estimate(out, r);
  return kExitOk;
}

int cmd_scaling(const ExperimentConfig& c, const RunOptions& o, std::ostream& out) {
  if (c.horizons.size() < 2) throw ConfigError("scaling needs at least two entries in T_list");
  if (o.method && effective_method(c, o) != Method::guided_is) {
    throw ConfigError("scaling only supports --method guided-is");
  }
  const std::uint64_t seed = resolve_seed(o, c);
  const McOptions mc{seed, workers(o)};
  const auto study =
      scaling_study(c.rates, {make_event(c)}, c.horizons, c.n_replicas, mc, c.proposal).front();

  const auto dir = output_dir(c, o);
  std::string csv = std::string(kCsvHeader) + "\n";
  ojson rows = ojson::array();
  for (const auto& row : study.rows) {
    csv += csv_row(row.estimate);
    auto j = result_json(row.estimate);
    j["in_fit"] = row.in_fit;
    rows.push_back(std::move(j));
  }
  write_file(dir / "scaling.csv", csv);
  ojson j;
  j["event"] = c.event == EventKind::tube ? "tube" : "strip";
  j["epsilon"] = c.epsilon;
  if (c.upper) j["M"] = *c.upper;
  j["proposal"] = to_string(c.proposal.kind);
  j["target_rate"] = num(study.target_rate);
  if (c.event == EventKind::strip) j["strip_inf_rate"] = strip_inf_rate(c.target, *c.upper, c.rates);
  j["free_fit"] = fit_json(study.free_fit);
  j["zero_fit"] = fit_json(study.zero_fit);
  j["rows"] = std::move(rows);
  j["warnings"] = study.warnings;
  write_file(dir / "scaling.json", j.dump(2) + "\n");
  write_manifest(dir, "scaling", c, seed);

  out << "T,normalized,log_p_hat,n_hits,ess\n";
  for (const auto& row : study.rows) {
    out << g17(row.horizon) << "," << g17(row.estimate.normalized) << ","
        << g17(row.estimate.log_p_hat) << "," << row.estimate.n_hits << ","
        << g17(row.estimate.ess) << "\n";
  }
  out << "I(f) = " << g17(study.target_rate) << "\n"
      << "free fit: slope = " << g17(study.free_fit.slope)
      << "  intercept = " << g17(study.free_fit.intercept) << "\n"
      << "zero-intercept fit: slope = " << g17(study.zero_fit.slope) << "\n";
  for (const auto& w : study.warnings) out << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_consistency(const ExperimentConfig& c, const RunOptions& o, std::ostream& out) {
  const double T = c.horizon.value_or(2.0);
  const std::uint64_t seed = resolve_seed(o, c);
  const auto rep = consistency_check(c.rates, T, c.n_replicas, McOptions{seed, workers(o)});

  const auto dir = output_dir(c, o);
  write_file(dir / "consistency.csv",
             std::string(kCsvHeader) + "\n" + csv_row(rep.direct) + csv_row(rep.weighted));
  ojson j;
  j["T"] = T;
  j["n"] = rep.n;
  j["direct"] = result_json(rep.direct);
  j["weighted"] = result_json(rep.weighted);
  j["total_mass"] = result_json(rep.total_mass);
  j["z_score"] = num(rep.z_score);
  write_file(dir / "consistency.json", j.dump(2) + "\n");
  write_manifest(dir, "consistency", c, seed);

  out << "direct   p = " << g17(rep.direct.p_hat) << " +- " << g17(rep.direct.std_error) << "\n"
      << "weighted p = " << g17(rep.weighted.p_hat) << " +- " << g17(rep.weighted.std_error)
      << "\n"
      << "total mass = " << g17(rep.total_mass.p_hat) << " +- "
      << g17(rep.total_mass.std_error) << "\n"
      << "z = " << g17(rep.z_score) << "\n";
  if (!(std::abs(rep.z_score) <= 4.0)) {
    out << "inconsistent: |z| > 4\n";
    return kExitInconsistent;
  }
  return kExitOk;
}

int run_command(const std::string& command, const std::string& config_path,
                const RunOptions& opts, std::ostream& out, std::ostream& err) {
  if (command == "validate") return cmd_validate(config_path, out, err);
  try {
    const ExperimentConfig c = load_config(config_path);
    if (command == "rate") return cmd_rate(c, out);
    if (command == "simulate") return cmd_simulate(c, opts, out);
    if (command == "estimate") return cmd_estimate(c, opts, out);
    if (command == "scaling") return cmd_scaling(c, opts, out);
    if (command == "consistency") return cmd_consistency(c, opts, out);
    err << "unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ldp
