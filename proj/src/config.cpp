#include "ldp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ldp {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {"rates",  "target",     "epsilon", "M",           "event",
                                     "T",      "T_list",     "n_replicas", "master_seed", "method",
                                     "proposal", "output_dir"};
const std::set<std::string> kRateKeys = {"lambda_up1", "lambda_up2", "lambda_down1",
                                         "lambda_down2", "lambda_joint"};
const std::set<std::string> kProposalKeys = {"kind", "alpha_min", "pieces", "ratio_floor"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError(name + " must be a number");
  return v.get<double>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& name) {
  if (!v.is_number_unsigned()) throw ConfigError(name + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

RateParams parse_rates(const json& r) {
  if (!r.is_object()) throw ConfigError("rates must be an object");
  reject_unknown(r, kRateKeys, "rates");
  auto get = [&](const char* key) { return r.contains(key) ? number(r[key], key) : 1.0; };
  try {
    return RateParams(get("lambda_up1"), get("lambda_up2"), get("lambda_down1"),
                      get("lambda_down2"), get("lambda_joint"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("rate positivity: ") + e.what());
  }
}

PiecewiseLinearPath parse_target(const json& t) {
  if (!t.is_array() || t.empty()) throw ConfigError("target must be a non-empty list of [t, f1, f2]");
  std::vector<Breakpoint> bp;
  for (const auto& row : t) {
    if (!row.is_array() || row.size() != 3) throw ConfigError("target rows must be [t, f1, f2]");
    bp.push_back({number(row[0], "target t"), number(row[1], "target f1"),
                  number(row[2], "target f2")});
  }
  return PiecewiseLinearPath(std::move(bp));
}

ProposalOptions parse_proposal(const json& p) {
  if (!p.is_object()) throw ConfigError("proposal must be an object");
  reject_unknown(p, kProposalKeys, "proposal");
  ProposalOptions o;
  try {
    if (p.contains("kind")) o.kind = proposal_kind_from_string(p["kind"].get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("proposal.kind: ") + e.what());
  }
  if (p.contains("alpha_min")) o.alpha_min = number(p["alpha_min"], "proposal.alpha_min");
  if (p.contains("pieces")) o.pieces = unsigned_integer(p["pieces"], "proposal.pieces");
  if (p.contains("ratio_floor")) o.ratio_floor = number(p["ratio_floor"], "proposal.ratio_floor");
  return o;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, kKeys, "config");

  ExperimentConfig c;
  c.source = std::string(text);
  if (doc.contains("rates")) c.rates = parse_rates(doc["rates"]);
  if (doc.contains("target")) c.target = parse_target(doc["target"]);
  if (doc.contains("epsilon")) c.epsilon = number(doc["epsilon"], "epsilon");
  if (doc.contains("M")) c.upper = number(doc["M"], "M");
  if (doc.contains("event")) {
    const auto& e = doc["event"];
    if (e == "tube") {
      c.event = EventKind::tube;
    } else if (e == "strip") {
      c.event = EventKind::strip;
    } else {
      throw ConfigError("event must be \"tube\" or \"strip\"");
    }
  }
  if (doc.contains("T")) c.horizon = number(doc["T"], "T");
  if (doc.contains("T_list")) {
    const auto& l = doc["T_list"];
    if (!l.is_array()) throw ConfigError("T_list must be a list of numbers");
    c.horizons.clear();
    for (const auto& v : l) c.horizons.push_back(number(v, "T_list entry"));
  }
  if (doc.contains("n_replicas")) c.n_replicas = unsigned_integer(doc["n_replicas"], "n_replicas");
  if (doc.contains("master_seed")) c.master_seed = unsigned_integer(doc["master_seed"], "master_seed");
  if (doc.contains("method")) {
    try {
      c.method = method_from_string(doc["method"].get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("method: ") + e.what());
    }
  }
  if (doc.contains("proposal")) c.proposal = parse_proposal(doc["proposal"]);
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw ConfigError("output_dir must be a string");
    c.output_dir = doc["output_dir"].get<std::string>();
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const ExperimentConfig& c) {
  if (auto report = validate_target(c.target)) {
    throw ConfigError(report->message);
  }
  if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon)) throw ConfigError("epsilon must be positive");
  if (c.upper && !(*c.upper > c.target.sup_max())) {
    throw ConfigError("M must exceed sup_t max{f1(t), f2(t)}");
  }
  if (c.event == EventKind::strip && !c.upper) throw ConfigError("strip event needs M");
  if (c.horizon && (!(*c.horizon > 0.0) || !std::isfinite(*c.horizon))) {
    throw ConfigError("T must be positive");
  }
  for (std::size_t k = 0; k < c.horizons.size(); ++k) {
    if (!(c.horizons[k] > 0.0) || !std::isfinite(c.horizons[k])) {
      throw ConfigError("T_list entries must be positive");
    }
    if (k > 0 && !(c.horizons[k] > c.horizons[k - 1])) {
      throw ConfigError("T_list must be strictly increasing");
    }
  }
  if (c.n_replicas < 1) throw ConfigError("n_replicas must be at least 1");
  if (!(c.proposal.alpha_min > 0.0)) throw ConfigError("proposal.alpha_min must be positive");
  if (!(c.proposal.ratio_floor > 0.0 && c.proposal.ratio_floor < 1.0)) {
    throw ConfigError("proposal.ratio_floor must lie in (0, 1)");
  }
}

EventSpec make_event(const ExperimentConfig& c) {
  if (c.event == EventKind::strip) return EventSpec::strip(c.target, c.epsilon, *c.upper);
  return EventSpec::tube(c.target, c.epsilon);
}

}  // namespace ldp
