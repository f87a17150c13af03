// Copyright 2026 The PLS Bandits Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configuration, sweep expansion and result serialization.

#ifndef PLS_EXPERIMENT_HPP_
#define PLS_EXPERIMENT_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pls/common.hpp"
#include "pls/schedule.hpp"
#include "pls/sim.hpp"

namespace pls {

using Json = nlohmann::ordered_json;

inline constexpr int kResultsSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "pls-bandits 1.0.0";

/// Invalid configuration, tagged with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct InstanceConfig {
  std::string mode = "random";          // "fixed" or "random"
  std::vector<double> theta;            // fixed mode
  double norm = 0.5;                    // random mode
  std::optional<double> norm_coeff;     // random mode: norm = min(1, coeff / sqrt(M T))
};

struct ExperimentConfig {
  double sigma = 0.5;
  double delta = 0.05;
  double alpha0 = 0.5;
  double beta0 = 0.5;
  std::vector<std::string> algorithms{"pls"};
  std::vector<std::int64_t> T{10000};
  std::vector<std::size_t> M{2};
  std::vector<std::size_t> d{2};
  std::vector<std::size_t> s;  // empty: dense instances
  std::optional<std::size_t> sparse_m;
  double design_constant = 80.0;
  InstanceConfig instance;
  std::size_t n_reps = 1;
  std::uint64_t seed = 1;
  std::size_t parallelism = 1;
  std::int64_t capacity_bits = 64;
  std::string out_dir = "runs";
  bool plots = true;
};

namespace detail {

template <typename T>
T get_field(const Json& j, const std::string& parent, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(parent + key, std::string("wrong type (") + e.what() + ")");
  }
}

inline void expect_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

}  // namespace detail

/// Field-path validation of everything a sweep will touch.
inline void validate(const ExperimentConfig& c) {
  auto check = [](bool ok, const char* path, const char* what) {
    if (!ok) throw ConfigError(path, what);
  };
  check(c.sigma > 0.0 && std::isfinite(c.sigma), "policy.sigma", "must be positive");
  check(c.delta > 0.0 && c.delta < 1.0, "policy.delta", "must lie in (0, 1)");
  check(c.alpha0 > 0.0 && c.alpha0 < 1.0, "policy.alpha0", "must lie in (0, 1)");
  check(c.beta0 > 0.0 && c.beta0 < 1.0, "policy.beta0", "must lie in (0, 1)");
  check(!c.algorithms.empty(), "algorithms", "must not be empty");
  for (const auto& a : c.algorithms) {
    if (!algorithm_from_string(a)) throw ConfigError("algorithms", "unknown algorithm '" + a + "'");
    if (a == "sparse_pls" && c.s.empty()) throw ConfigError("sweep.s", "sparse_pls needs at least one sparsity");
  }
  check(!c.T.empty(), "sweep.T", "must not be empty");
  check(!c.M.empty(), "sweep.M", "must not be empty");
  check(!c.d.empty(), "sweep.d", "must not be empty");
  for (auto t : c.T) check(t >= 1, "sweep.T", "entries must be >= 1");
  for (auto m : c.M) check(m >= 1, "sweep.M", "entries must be >= 1");
  for (auto d : c.d) check(d >= 1, "sweep.d", "entries must be >= 1");
  for (auto s : c.s)
    for (auto d : c.d) check(s >= 1 && s <= d, "sweep.s", "entries must lie in [1, d]");
  check(!c.sparse_m || *c.sparse_m >= 1, "sparse.m", "must be >= 1");
  check(c.design_constant > 0.0, "sparse.design_constant", "must be positive");
  check(c.n_reps >= 1, "n_reps", "must be >= 1");
  check(c.parallelism >= 1, "parallelism", "must be >= 1");
  check(c.capacity_bits >= 1, "capacity_bits", "must be >= 1");
  check(!c.out_dir.empty(), "output.dir", "must not be empty");
  if (c.instance.mode == "fixed") {
    check(!c.instance.theta.empty(), "instance.theta", "fixed mode needs theta");
    check(norm2(c.instance.theta) <= 1.0 + 1e-12, "instance.theta", "norm must be <= 1");
    for (auto d : c.d) check(d == c.instance.theta.size(), "instance.theta", "length must equal every sweep.d");
  } else if (c.instance.mode == "random") {
    if (c.instance.norm_coeff) {
      check(*c.instance.norm_coeff > 0.0, "instance.norm_coeff", "must be positive");
    } else {
      check(c.instance.norm >= 0.0 && c.instance.norm <= 1.0, "instance.norm", "must lie in [0, 1]");
    }
  } else {
    throw ConfigError("instance.mode", "must be 'fixed' or 'random'");
  }
}

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["n_reps"] = c.n_reps;
  j["parallelism"] = c.parallelism;
  j["capacity_bits"] = c.capacity_bits;
  j["algorithms"] = c.algorithms;
  j["policy"] = {{"sigma", c.sigma}, {"delta", c.delta}, {"alpha0", c.alpha0}, {"beta0", c.beta0}};
  j["sweep"] = {{"T", c.T}, {"M", c.M}, {"d", c.d}, {"s", c.s}};
  Json inst = {{"mode", c.instance.mode}};
  if (!c.instance.theta.empty()) inst["theta"] = c.instance.theta;
  inst["norm"] = c.instance.norm;
  inst["norm_coeff"] = c.instance.norm_coeff ? Json(*c.instance.norm_coeff) : Json(nullptr);
  j["instance"] = inst;
  j["sparse"] = {{"m", c.sparse_m ? Json(*c.sparse_m) : Json(nullptr)}, {"design_constant", c.design_constant}};
  j["output"] = {{"dir", c.out_dir}, {"plots", c.plots}};
  return j;
}

/// Parses and validates; missing keys take their defaults.
inline ExperimentConfig experiment_from_json(const Json& j) {
  using detail::get_field;
  detail::expect_object(j, "");
  ExperimentConfig c;
  c.seed = get_field(j, "", "seed", c.seed);
  c.n_reps = get_field(j, "", "n_reps", c.n_reps);
  c.parallelism = get_field(j, "", "parallelism", c.parallelism);
  c.capacity_bits = get_field(j, "", "capacity_bits", c.capacity_bits);
  c.algorithms = get_field(j, "", "algorithms", c.algorithms);
  if (j.contains("policy")) {
    const Json& p = j.at("policy");
    detail::expect_object(p, "policy");
    c.sigma = get_field(p, "policy.", "sigma", c.sigma);
    c.delta = get_field(p, "policy.", "delta", c.delta);
    c.alpha0 = get_field(p, "policy.", "alpha0", c.alpha0);
    c.beta0 = get_field(p, "policy.", "beta0", c.beta0);
  }
  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    detail::expect_object(s, "sweep");
    c.T = get_field(s, "sweep.", "T", c.T);
    c.M = get_field(s, "sweep.", "M", c.M);
    c.d = get_field(s, "sweep.", "d", c.d);
    c.s = get_field(s, "sweep.", "s", c.s);
  }
  if (j.contains("instance")) {
    const Json& i = j.at("instance");
    detail::expect_object(i, "instance");
    c.instance.mode = get_field(i, "instance.", "mode", c.instance.mode);
    c.instance.theta = get_field(i, "instance.", "theta", c.instance.theta);
    c.instance.norm = get_field(i, "instance.", "norm", c.instance.norm);
    if (i.contains("norm_coeff") && !i.at("norm_coeff").is_null())
      c.instance.norm_coeff = get_field<double>(i, "instance.", "norm_coeff", 0.0);
  }
  if (j.contains("sparse")) {
    const Json& s = j.at("sparse");
    detail::expect_object(s, "sparse");
    if (s.contains("m") && !s.at("m").is_null()) c.sparse_m = get_field<std::size_t>(s, "sparse.", "m", 0);
    c.design_constant = get_field(s, "sparse.", "design_constant", c.design_constant);
  }
  if (j.contains("output")) {
    const Json& o = j.at("output");
    detail::expect_object(o, "output");
    c.out_dir = get_field(o, "output.", "dir", c.out_dir);
    c.plots = get_field(o, "output.", "plots", c.plots);
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_experiment(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  return experiment_from_json(j);
}

/// Applies KEY=VALUE with a dotted key; VALUE is read as JSON when it parses,
/// otherwise as a string.
inline void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like KEY=VALUE");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) throw ConfigError(key, "parent is not an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

/// One point of the sweep grid.
struct SweepCell {
  Algorithm algorithm = Algorithm::kPls;
  PolicyConfig policy;
  std::optional<std::size_t> sparsity;
  InstanceSpec instance;

  std::string label() const {
    std::ostringstream os;
    os << to_string(algorithm) << "-T" << policy.T << "-M" << policy.M << "-d" << policy.d;
    if (sparsity) os << "-s" << *sparsity;
    return os.str();
  }
};

inline std::vector<SweepCell> expand_sweep(const ExperimentConfig& c) {
  std::vector<SweepCell> cells;
  std::vector<std::optional<std::size_t>> sparsities;
  if (c.s.empty()) {
    sparsities.push_back(std::nullopt);
  } else {
    for (auto s : c.s) sparsities.emplace_back(s);
  }
  for (const auto& name : c.algorithms) {
    const Algorithm alg = *algorithm_from_string(name);
    for (auto T : c.T)
      for (auto M : c.M)
        for (auto d : c.d)
          for (const auto& s : sparsities) {
            SweepCell cell;
            cell.algorithm = alg;
            cell.sparsity = s;
            cell.policy.d = d;
            cell.policy.M = M;
            cell.policy.T = T;
            cell.policy.sigma = c.sigma;
            cell.policy.delta = c.delta;
            cell.policy.alpha0 = c.alpha0;
            cell.policy.beta0 = c.beta0;
            if (s && alg == Algorithm::kSparsePls) {
              const std::size_t m = c.sparse_m ? *c.sparse_m : sparse_design_size(d, *s, c.delta, c.design_constant).m;
              cell.policy.sparse = SparseSettings{*s, m};
            }
            cell.instance.sigma = c.sigma;
            cell.instance.sparsity = s;
            if (c.instance.mode == "fixed") {
              cell.instance.kind = InstanceSpec::Kind::kFixed;
              cell.instance.theta = c.instance.theta;
            } else {
              cell.instance.kind = InstanceSpec::Kind::kRandomDirection;
              cell.instance.norm =
                  c.instance.norm_coeff
                      ? std::min(1.0, *c.instance.norm_coeff / std::sqrt(static_cast<double>(M) * static_cast<double>(T)))
                      : c.instance.norm;
            }
            cells.push_back(std::move(cell));
          }
  }
  return cells;
}

inline std::string run_id(const SweepCell& cell, std::size_t rep) { return cell.label() + "-r" + std::to_string(rep); }

// ---------------------------------------------------------------------------
// RunRecord serialization

inline Json to_json(const PolicyConfig& p) {
  Json j = {{"d", p.d}, {"M", p.M}, {"T", p.T}, {"sigma", p.sigma}, {"delta", p.delta}, {"alpha0", p.alpha0},
            {"beta0", p.beta0}};
  if (p.sparse) j["sparse"] = {{"s", p.sparse->s}, {"m", p.sparse->m}};
  return j;
}

inline Json to_json(const RunRecord& r) {
  auto bits = [&](std::int64_t v) { return r.bits_valid ? Json(v) : Json(nullptr); };
  Json j;
  j["algorithm"] = std::string(to_string(r.algorithm));
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["config"] = to_json(r.config);
  j["K"] = r.K;
  j["k0"] = r.k0 ? Json(*r.k0) : Json(nullptr);
  j["bits_valid"] = r.bits_valid;
  j["final_error"] = r.final_error;
  j["regret"] = r.regret();
  j["pulls_per_agent"] = r.pulls_per_agent;
  j["uplink_messages_per_agent"] = r.uplink_messages_per_agent;
  j["downlink_messages"] = r.downlink_messages;
  j["c_u_bits"] = bits(r.uplink_bits);
  j["c_d_bits"] = bits(r.downlink_bits);
  j["uplink_uses"] = bits(r.uplink_uses);
  j["downlink_uses"] = bits(r.downlink_uses);
  Json log = Json::array();
  for (const auto& e : r.epoch_log) {
    log.push_back({{"k", e.k},
                   {"stage", std::string(to_string(e.stage))},
                   {"start_t", e.start_t},
                   {"explore_end_t", e.explore_end_t},
                   {"end_t", e.end_t},
                   {"server_error", e.server_error},
                   {"tau", e.tau},
                   {"uplink_bits", bits(e.uplink_bits)},
                   {"downlink_bits", bits(e.downlink_bits)},
                   {"uplink_uses", bits(e.uplink_uses)},
                   {"downlink_uses", bits(e.downlink_uses)},
                   {"exploit_rounds", e.exploit_rounds}});
  }
  j["epoch_log"] = log;
  Json cps = Json::array();
  for (const auto& c : r.checkpoints) {
    cps.push_back({{"t", c.t},
                   {"regret", c.regret},
                   {"c_u_bits", bits(c.c_u_bits)},
                   {"c_d_bits", bits(c.c_d_bits)},
                   {"stage", std::string(to_string(c.stage))},
                   {"epoch", c.epoch},
                   {"on_grid", c.on_grid}});
  }
  j["checkpoints"] = cps;
  return j;
}

inline Json to_json(const std::vector<SummaryRow>& rows) {
  Json out = Json::array();
  auto band = [](const QuantileBand& b) {
    return Json{{"q10", b.q10}, {"q50", b.q50}, {"q90", b.q90}, {"mean", b.mean}};
  };
  for (const auto& r : rows) {
    out.push_back({{"t", r.t}, {"regret", band(r.regret)}, {"c_u_bits", band(r.c_u_bits)},
                   {"c_d_bits", band(r.c_d_bits)}});
  }
  return out;
}

inline constexpr const char* kCsvHeader = "run_id,t,regret,c_u_bits,c_d_bits,stage,epoch";

/// Shortest round-trip decimal for a double.
inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// CSV rows, one per checkpoint. Unquantized runs write "inf" bit counts.
inline std::string csv_rows(const std::string& id, const RunRecord& r) {
  std::ostringstream os;
  for (const auto& c : r.checkpoints) {
    os << id << ',' << c.t << ',' << format_double(c.regret) << ',';
    if (r.bits_valid) {
      os << c.c_u_bits << ',' << c.c_d_bits;
    } else {
      os << "inf,inf";
    }
    os << ',' << to_string(c.stage) << ',' << c.epoch << '\n';
  }
  return os.str();
}

}  // namespace pls

#endif  // PLS_EXPERIMENT_HPP_
