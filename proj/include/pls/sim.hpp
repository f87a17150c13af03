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

// Full synchronous runs of M agents plus a server, the reference baselines,
// Monte Carlo replication and log-log scaling audits.

#ifndef PLS_SIM_HPP_
#define PLS_SIM_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pls/codec.hpp"
#include "pls/common.hpp"
#include "pls/model.hpp"
#include "pls/protocol.hpp"
#include "pls/rng.hpp"
#include "pls/schedule.hpp"
#include "pls/sparse.hpp"

namespace pls {

enum class Algorithm { kPls, kSparsePls, kUnquantizedPls, kIndependentAgents, kFixedOptimal };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPls: return "pls";
    case Algorithm::kSparsePls: return "sparse_pls";
    case Algorithm::kUnquantizedPls: return "unquantized_pls";
    case Algorithm::kIndependentAgents: return "independent_agents";
    case Algorithm::kFixedOptimal: return "fixed_optimal";
  }
  return "?";
}

inline std::optional<Algorithm> algorithm_from_string(std::string_view s) {
  for (Algorithm a : {Algorithm::kPls, Algorithm::kSparsePls, Algorithm::kUnquantizedPls,
                      Algorithm::kIndependentAgents, Algorithm::kFixedOptimal}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

enum class Stage { kNormEstimation, kRefinementExplore, kRefinementExploit, kFinalExploit, kBaseline };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kNormEstimation: return "norm_estimation";
    case Stage::kRefinementExplore: return "refinement_explore";
    case Stage::kRefinementExploit: return "refinement_exploit";
    case Stage::kFinalExploit: return "final_exploit";
    case Stage::kBaseline: return "baseline";
  }
  return "?";
}

inline std::optional<Stage> stage_from_string(std::string_view s) {
  for (Stage st : {Stage::kNormEstimation, Stage::kRefinementExplore, Stage::kRefinementExploit,
                   Stage::kFinalExploit, Stage::kBaseline}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

struct Checkpoint {
  std::int64_t t = 0;
  double regret = 0.0;
  std::int64_t c_u_bits = 0;  // total over agents
  std::int64_t c_d_bits = 0;  // per agent (broadcasts counted once)
  Stage stage = Stage::kNormEstimation;
  int epoch = 0;
  bool on_grid = false;  // powers of two and T; shared by every run with the same T
};

struct EpochLogEntry {
  int k = 0;
  Stage stage = Stage::kNormEstimation;  // kNormEstimation or kRefinementExplore
  std::int64_t start_t = 0;
  std::int64_t explore_end_t = 0;
  std::int64_t end_t = 0;
  double server_error = 0.0;  // ||theta_hat^(serv)_k - theta*||
  double tau = 0.0;
  std::int64_t uplink_bits = 0;
  std::int64_t downlink_bits = 0;
  std::int64_t uplink_uses = 0;
  std::int64_t downlink_uses = 0;
  std::int64_t max_uplink_message_bits = 0;
  double uplink_bound_bits = 0.0;  // per-message size bound for this epoch
  std::int64_t exploit_rounds = 0;
};

struct RunRecord {
  Algorithm algorithm = Algorithm::kPls;
  std::uint64_t seed = 0;
  std::string config_hash;
  PolicyConfig config;
  int K = 1;
  std::optional<int> k0;
  std::vector<Checkpoint> checkpoints;
  std::vector<EpochLogEntry> epoch_log;
  double final_error = 0.0;
  std::int64_t uplink_messages_per_agent = 0;
  std::int64_t downlink_messages = 0;
  std::int64_t uplink_bits = 0;
  std::int64_t downlink_bits = 0;
  std::int64_t uplink_uses = 0;
  std::int64_t downlink_uses = 0;
  std::int64_t pulls_per_agent = 0;
  bool bits_valid = true;  // false for the unquantized baseline

  double regret() const { return checkpoints.empty() ? 0.0 : checkpoints.back().regret; }

  /// ||theta_hat_k - theta*|| <= tau_k for every logged epoch.
  bool envelope_held() const {
    return std::all_of(epoch_log.begin(), epoch_log.end(),
                       [](const EpochLogEntry& e) { return e.server_error <= e.tau; });
  }

  std::vector<Checkpoint> grid_checkpoints() const {
    std::vector<Checkpoint> out;
    for (const auto& c : checkpoints)
      if (c.on_grid) out.push_back(c);
    return out;
  }
};

struct RunOptions {
  std::int64_t capacity_bits = 64;
  LassoOptions lasso{};
};

/// FNV-1a over a canonical text form of the configuration.
inline std::string config_hash(const PolicyConfig& cfg, Algorithm algorithm) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(algorithm) << '|' << cfg.d << '|' << cfg.M << '|' << cfg.T << '|' << cfg.sigma << '|' << cfg.delta
     << '|' << cfg.alpha0 << '|' << cfg.beta0;
  if (cfg.sparse) os << '|' << cfg.sparse->s << '|' << cfg.sparse->m;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return out;
}

/// Powers of two up to T, then T itself.
inline std::vector<std::int64_t> checkpoint_grid(std::int64_t T) {
  std::vector<std::int64_t> grid;
  for (std::int64_t g = 1; g < T; g *= 2) grid.push_back(g);
  grid.push_back(T);
  return grid;
}

namespace detail {

// Cumulative regret and bit counters along the per-agent time axis, emitting
// checkpoints on the shared grid and at epoch boundaries.
class Timeline {
 public:
  explicit Timeline(std::int64_t T) : grid_(checkpoint_grid(T)) {}

  std::int64_t t() const { return t_; }
  double regret() const { return regret_.value(); }

  void set_bits(std::int64_t c_u, std::int64_t c_d) {
    c_u_ = c_u;
    c_d_ = c_d;
  }

  /// `n` round-robin pulls over actions whose total (all-agent) per-pull
  /// regret is `per_action`.
  void advance_round_robin(std::int64_t n, std::span<const double> per_action, Stage stage, int epoch) {
    if (n <= 0) return;
    const auto p = static_cast<std::int64_t>(per_action.size());
    Vec prefix(per_action.size() + 1, 0.0);
    for (std::size_t i = 0; i < per_action.size(); ++i) prefix[i + 1] = prefix[i] + per_action[i];
    auto partial = [&](std::int64_t pulls) {
      return static_cast<double>(pulls / p) * prefix.back() + prefix[static_cast<std::size_t>(pulls % p)];
    };
    advance(n, partial, stage, epoch);
  }

  void advance_constant(std::int64_t n, double per_round, Stage stage, int epoch) {
    if (n <= 0) return;
    advance(n, [&](std::int64_t pulls) { return static_cast<double>(pulls) * per_round; }, stage, epoch);
  }

  void mark(Stage stage, int epoch) {
    if (!checkpoints_.empty() && checkpoints_.back().t == t_ && !checkpoints_.back().on_grid &&
        checkpoints_.back().c_u_bits == c_u_ && checkpoints_.back().c_d_bits == c_d_) {
      return;
    }
    checkpoints_.push_back({t_, regret(), c_u_, c_d_, stage, epoch, false});
  }

  std::vector<Checkpoint> take() { return std::move(checkpoints_); }

 private:
  template <typename Partial>
  void advance(std::int64_t n, Partial partial, Stage stage, int epoch) {
    const std::int64_t start = t_;
    const double base = regret_.value();
    while (next_grid_ < grid_.size() && grid_[next_grid_] <= start + n) {
      const std::int64_t g = grid_[next_grid_++];
      checkpoints_.push_back({g, base + partial(g - start), c_u_, c_d_, stage, epoch, true});
    }
    regret_.add(partial(n));
    t_ = start + n;
  }

  std::vector<std::int64_t> grid_;
  std::size_t next_grid_ = 0;
  std::vector<Checkpoint> checkpoints_;
  KahanSum regret_;
  std::int64_t t_ = 0;
  std::int64_t c_u_ = 0;
  std::int64_t c_d_ = 0;
};

inline Vec exploration_regrets(const BanditInstance& env, const ExplorationSet& set, std::size_t agents) {
  Vec r(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    r[i] = static_cast<double>(agents) * std::max(0.0, instantaneous_regret(env, set.action(i)));
  }
  return r;
}

inline void check_message(const BitMessage& msg, double bound, const std::string& what) {
  if (static_cast<double>(msg.size()) > bound) {
    throw ProtocolError(what + " of " + std::to_string(msg.size()) + " bits exceeds the size bound " +
                        std::to_string(bound));
  }
}

inline RunRecord run_protocol(const PolicyConfig& cfg, const BanditInstance& env, Algorithm algorithm,
                              std::uint64_t seed, const RunOptions& opt) {
  const bool sparse = algorithm == Algorithm::kSparsePls;
  const bool quantize = algorithm != Algorithm::kUnquantizedPls;
  require(!sparse || cfg.sparse.has_value(), "run: sparse_pls needs PolicyConfig.sparse");
  PolicyConfig effective = cfg;
  if (!sparse) effective.sparse.reset();
  auto schedule = std::make_shared<const EpochSchedule>(effective);
  const ExplorationSet set =
      sparse ? ExplorationSet::sensing(std::make_shared<const SensingDesign>(
                   effective.sparse->m, effective.d, derive_seed(seed, StreamTag::kSensingDesign)))
             : ExplorationSet::standard_basis(effective.d);
  const std::size_t M = effective.M;
  const std::size_t p = set.size();
  const std::size_t d = effective.d;

  std::vector<Agent> agents;
  agents.reserve(M);
  for (std::size_t j = 0; j < M; ++j) agents.emplace_back(j, schedule, set, seed, quantize);
  Server server(schedule, set, quantize, opt.lasso);
  ChannelLedger ledger(opt.capacity_bits);
  Timeline timeline(effective.T);
  const Vec explore_regret = exploration_regrets(env, set, M);

  RunRecord rec;
  rec.algorithm = algorithm;
  rec.seed = seed;
  rec.config = effective;
  rec.config_hash = config_hash(effective, algorithm);
  rec.K = schedule->K();
  rec.bits_valid = quantize;

  auto exploit_regret = [&](const Agent& a) {
    return static_cast<double>(M) * std::max(0.0, instantaneous_regret(env, a.exploit_action()));
  };

  while (agents.front().phase() != Phase::kDone) {
    Agent& lead = agents.front();
    if (lead.schedule_exhausted()) {
      const std::int64_t rounds = effective.T - lead.pulls_used();
      timeline.advance_constant(rounds, exploit_regret(lead), Stage::kFinalExploit, lead.epoch() - 1);
      for (Agent& a : agents) a.exploit(rounds);
      timeline.mark(Stage::kFinalExploit, lead.epoch() - 1);
      break;
    }
    const int k = lead.epoch();
    const bool norm_stage = lead.phase() == Phase::kNormEstimation;
    const Stage stage = norm_stage ? Stage::kNormEstimation : Stage::kRefinementExplore;
    const EpochParams& params = schedule->at(k);
    EpochLogEntry entry;
    entry.k = k;
    entry.stage = stage;
    entry.start_t = timeline.t();
    entry.tau = params.tau;

    std::vector<Uplink> uplinks;
    uplinks.reserve(M);
    std::int64_t pulls = 0;
    for (Agent& a : agents) {
      ExplorationResult r = a.explore_epoch(env);
      pulls = r.pulls;
      if (r.estimate) uplinks.push_back(a.uplink(*r.estimate));
    }
    timeline.advance_round_robin(pulls, explore_regret, stage, k);
    if (uplinks.empty()) {
      timeline.mark(stage, k);
      break;  // budget ran out mid-exploration
    }
    entry.explore_end_t = timeline.t();

    const double up_bound = unary_length_bound(p, params.uplink_radius(),
                                               params.alpha / std::sqrt(static_cast<double>(p)));
    entry.uplink_bound_bits = up_bound;
    const std::int64_t up_before = ledger.uplink_bits();
    const std::int64_t up_uses_before = ledger.uplink_uses();
    const std::int64_t down_before = ledger.downlink_bits();
    const std::int64_t down_uses_before = ledger.downlink_uses();
    for (const Uplink& u : uplinks) {
      if (quantize) {
        check_message(u.bits, up_bound, "uplink message (agent " + std::to_string(u.agent) + ", epoch " +
                                            std::to_string(k) + ")");
        ledger.transmit(u.bits);
      }
      entry.max_uplink_message_bits =
          std::max(entry.max_uplink_message_bits, static_cast<std::int64_t>(u.bits.size()));
    }
    rec.uplink_messages_per_agent += 1;

    if (norm_stage) {
      const NormDecision decision = server.norm_step(uplinks);
      entry.server_error = distance(server.estimate(), env.theta_star());
      const BitMessage control = control_message(decision == NormDecision::kTerminate, k);
      if (quantize) ledger.transmit(control);
      rec.downlink_messages += 1;
      for (Agent& a : agents) a.on_norm_decision(control);
      if (decision == NormDecision::kTerminate) rec.k0 = k;
    } else {
      const Downlink down = server.refine_step(uplinks);
      entry.server_error = distance(server.estimate(), env.theta_star());
      if (quantize) {
        const double down_bound = unary_length_bound(d, params.downlink_radius(),
                                                     params.beta / std::sqrt(static_cast<double>(d)));
        check_message(down.bits, down_bound, "downlink message (epoch " + std::to_string(k) + ")");
        ledger.transmit(down.bits);
      }
      rec.downlink_messages += 1;
      for (Agent& a : agents) {
        a.on_refinement_broadcast(down);
        if (a.theta_bar() != server.theta_bar()) {
          throw ProtocolError("agent " + std::to_string(a.id()) + " desynchronized from the server at epoch " +
                              std::to_string(k));
        }
      }
    }
    entry.uplink_bits = ledger.uplink_bits() - up_before;
    entry.uplink_uses = ledger.uplink_uses() - up_uses_before;
    entry.downlink_bits = ledger.downlink_bits() - down_before;
    entry.downlink_uses = ledger.downlink_uses() - down_uses_before;
    timeline.set_bits(ledger.uplink_bits(), ledger.downlink_bits());
    timeline.mark(stage, k);

    if (!norm_stage) {
      const std::int64_t rounds = lead.exploitation_rounds();
      timeline.advance_constant(rounds, exploit_regret(lead), Stage::kRefinementExploit, k);
      for (Agent& a : agents) {
        a.exploit(rounds);
        if (a.phase() != Phase::kDone) a.next_epoch();
      }
      entry.exploit_rounds = rounds;
      timeline.mark(Stage::kRefinementExploit, k);
    }
    entry.end_t = timeline.t();
    rec.epoch_log.push_back(entry);
  }

  rec.checkpoints = timeline.take();
  rec.final_error = distance(agents.front().theta_bar(), env.theta_star());
  rec.pulls_per_agent = agents.front().pulls_used();
  rec.uplink_bits = ledger.uplink_bits();
  rec.downlink_bits = ledger.downlink_bits();
  rec.uplink_uses = ledger.uplink_uses();
  rec.downlink_uses = ledger.downlink_uses();

  if (rec.pulls_per_agent != effective.T) throw ProtocolError("run ended before the horizon");
  if (rec.uplink_messages_per_agent > rec.K + 1) throw ProtocolError("more uplink messages than epochs");
  if (quantize && !ledger.replay().counters_equal(ledger)) throw ProtocolError("ledger replay mismatch");
  return rec;
}

}  // namespace detail

/// Executes one synchronous run of exactly T pulls per agent. Deterministic
/// in (cfg, instance, algorithm, seed).
inline RunRecord run(const PolicyConfig& cfg, const BanditInstance& env, Algorithm algorithm, std::uint64_t seed,
                     const RunOptions& opt = {}) {
  cfg.validate();
  require(env.dim() == cfg.d, "run: instance dimension does not match the configuration");
  switch (algorithm) {
    case Algorithm::kPls:
    case Algorithm::kSparsePls:
    case Algorithm::kUnquantizedPls:
      return detail::run_protocol(cfg, env, algorithm, seed, opt);
    case Algorithm::kIndependentAgents: {
      // M single-agent learners, no communication.
      PolicyConfig solo = cfg;
      solo.M = 1;
      solo.sparse.reset();
      RunRecord rec;
      rec.algorithm = algorithm;
      rec.seed = seed;
      rec.config = cfg;
      rec.config_hash = config_hash(cfg, algorithm);
      rec.K = max_epochs(solo);
      rec.pulls_per_agent = cfg.T;
      double error_sum = 0.0;
      for (std::size_t j = 0; j < cfg.M; ++j) {
        RunRecord one = detail::run_protocol(solo, env, Algorithm::kPls,
                                             derive_seed(seed, StreamTag::kReplication, {j}), opt);
        auto grid = one.grid_checkpoints();
        if (rec.checkpoints.empty()) {
          rec.checkpoints = grid;
          for (auto& c : rec.checkpoints) {
            c.c_u_bits = 0;
            c.c_d_bits = 0;
            c.stage = Stage::kBaseline;
            c.epoch = 0;
          }
        } else {
          for (std::size_t i = 0; i < grid.size(); ++i) rec.checkpoints[i].regret += grid[i].regret;
        }
        error_sum += one.final_error;
      }
      rec.final_error = error_sum / static_cast<double>(cfg.M);
      return rec;
    }
    case Algorithm::kFixedOptimal: {
      RunRecord rec;
      rec.algorithm = algorithm;
      rec.seed = seed;
      rec.config = cfg;
      rec.config_hash = config_hash(cfg, algorithm);
      rec.K = max_epochs(cfg);
      rec.pulls_per_agent = cfg.T;
      for (std::int64_t g : checkpoint_grid(cfg.T)) rec.checkpoints.push_back({g, 0.0, 0, 0, Stage::kBaseline, 0, true});
      return rec;
    }
  }
  throw PreconditionError("run: unknown algorithm");
}

/// How replications obtain their instance.
struct InstanceSpec {
  enum class Kind { kFixed, kRandomDirection };
  Kind kind = Kind::kFixed;
  Vec theta;                         // kFixed
  double norm = 0.5;                 // kRandomDirection
  std::optional<std::size_t> sparsity;
  double sigma = 0.5;

  BanditInstance make(std::size_t d, std::uint64_t root_seed, std::size_t rep) const {
    if (kind == Kind::kFixed) return BanditInstance(theta, sigma, sparsity, root_seed);
    return sample_instance(d, norm, sparsity, derive_seed(root_seed, StreamTag::kInstance, {rep}), sigma);
  }
};

inline std::uint64_t replication_seed(std::uint64_t root_seed, std::size_t rep) {
  return derive_seed(root_seed, StreamTag::kReplication, {rep});
}

struct QuantileBand {
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double mean = 0.0;
};

/// Linear-interpolation quantile of unsorted data.
inline double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

inline QuantileBand band_of(const std::vector<double>& values) {
  KahanSum total;
  for (double v : values) total.add(v);
  return {quantile(values, 0.1), quantile(values, 0.5), quantile(values, 0.9),
          total.value() / static_cast<double>(values.size())};
}

struct SummaryRow {
  std::int64_t t = 0;
  QuantileBand regret;
  QuantileBand c_u_bits;
  QuantileBand c_d_bits;
};

struct ReplicationResult {
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;  // one row per grid checkpoint
};

inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs) {
  std::vector<SummaryRow> rows;
  if (runs.empty()) return rows;
  std::vector<std::vector<Checkpoint>> grids;
  for (const auto& r : runs) grids.push_back(r.grid_checkpoints());
  for (std::size_t i = 0; i < grids.front().size(); ++i) {
    std::vector<double> regret, cu, cd;
    for (const auto& g : grids) {
      require(g.size() == grids.front().size() && g[i].t == grids.front()[i].t,
              "summarize: runs do not share a checkpoint grid");
      regret.push_back(g[i].regret);
      cu.push_back(static_cast<double>(g[i].c_u_bits));
      cd.push_back(static_cast<double>(g[i].c_d_bits));
    }
    rows.push_back({grids.front()[i].t, band_of(regret), band_of(cu), band_of(cd)});
  }
  return rows;
}

/// Runs n_reps independent replications on split streams. The result does
/// not depend on `parallelism`.
inline ReplicationResult replicate(const PolicyConfig& cfg, const InstanceSpec& instances, Algorithm algorithm,
                                   std::size_t n_reps, std::size_t parallelism, std::uint64_t root_seed,
                                   const RunOptions& opt = {}) {
  require(n_reps >= 1, "replicate: n_reps must be >= 1");
  parallelism = std::clamp<std::size_t>(parallelism, 1, n_reps);
  ReplicationResult out;
  out.runs.resize(n_reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t rep = next++; rep < n_reps; rep = next++) {
      try {
        const BanditInstance env = instances.make(cfg.d, root_seed, rep);
        out.runs[rep] = run(cfg, env, algorithm, replication_seed(root_seed, rep), opt);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (parallelism == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < parallelism; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  out.summary = summarize(out.runs);
  return out;
}

// ---------------------------------------------------------------------------
// Scaling audits

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
inline SlopeFit least_squares(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "least_squares: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, "least_squares: x values must not all coincide");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  f.ci_low = f.ci_high = f.slope;
  return f;
}

/// One swept value and the metric observed in each replication there.
struct AuditGroup {
  double x = 0.0;
  std::vector<double> values;
};

enum class AxisTransform { kLogLog, kLinearVsLog };

/// Fits the group medians (log-log, or linear in log x) and attaches a
/// percentile bootstrap CI from resampling replications within groups.
inline SlopeFit fit_groups(const std::vector<AuditGroup>& groups, AxisTransform transform, int n_boot = 1000,
                           std::uint64_t seed = 0) {
  require(groups.size() >= 3, "scaling audit: need at least three values of the swept variable");
  for (const auto& g : groups) require(!g.values.empty() && g.x > 0.0, "scaling audit: empty or invalid group");
  auto fit_medians = [&](const std::vector<std::vector<double>>& samples) {
    Vec xs, ys;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const double med = median(samples[i]);
      xs.push_back(std::log(groups[i].x));
      ys.push_back(transform == AxisTransform::kLogLog ? std::log(std::max(med, 1e-300)) : med);
    }
    return least_squares(xs, ys);
  };
  std::vector<std::vector<double>> samples;
  for (const auto& g : groups) samples.push_back(g.values);
  SlopeFit fit = fit_medians(samples);
  if (n_boot > 0) {
    RandomStream stream(seed, StreamTag::kBootstrap);
    std::vector<double> slopes;
    slopes.reserve(static_cast<std::size_t>(n_boot));
    std::vector<std::vector<double>> resampled(groups.size());
    for (int b = 0; b < n_boot; ++b) {
      for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& v = groups[i].values;
        resampled[i].resize(v.size());
        for (double& r : resampled[i]) r = v[stream.bits() % v.size()];
      }
      slopes.push_back(fit_medians(resampled).slope);
    }
    fit.ci_low = quantile(slopes, 0.025);
    fit.ci_high = quantile(slopes, 0.975);
  }
  return fit;
}

struct AuditLine {
  std::string metric;
  std::string axis;
  SlopeFit fit;
  std::optional<std::pair<double, double>> band;  // pass/fail band on the slope
  bool passed = true;
};

struct AuditBands {
  std::pair<double, double> regret_vs_T{0.45, 0.65};
  std::pair<double, double> regret_vs_M{0.3, 0.7};
};

struct AuditReport {
  std::vector<AuditLine> lines;
  bool passed() const {
    return std::all_of(lines.begin(), lines.end(), [](const AuditLine& l) { return l.passed; });
  }
  std::string text() const {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "metric\taxis\tslope\tci_low\tci_high\tr2\tband\tresult\n";
    for (const auto& l : lines) {
      os << l.metric << '\t' << l.axis << '\t' << l.fit.slope << '\t' << l.fit.ci_low << '\t' << l.fit.ci_high
         << '\t' << l.fit.r_squared << '\t';
      if (l.band) {
        os << '[' << l.band->first << ',' << l.band->second << "]\t" << (l.passed ? "PASS" : "FAIL");
      } else {
        os << "-\tINFO";
      }
      os << '\n';
    }
    return os.str();
  }
};

/// Groups runs by the swept variable ("T" or "M") and fits the order checks:
/// regret slope vs T or M on log-log axes, and C_u against log T.
inline AuditReport scaling_audit(const std::vector<RunRecord>& runs, const std::string& axis,
                                 const AuditBands& bands = {}, std::uint64_t seed = 0) {
  require(axis == "T" || axis == "M", "scaling_audit: axis must be T or M");
  std::vector<AuditGroup> regret_groups, cu_groups;
  auto key = [&](const RunRecord& r) {
    return axis == "T" ? static_cast<double>(r.config.T) : static_cast<double>(r.config.M);
  };
  for (const auto& r : runs) {
    const double x = key(r);
    auto it = std::find_if(regret_groups.begin(), regret_groups.end(), [&](const AuditGroup& g) { return g.x == x; });
    if (it == regret_groups.end()) {
      regret_groups.push_back({x, {}});
      cu_groups.push_back({x, {}});
      it = regret_groups.end() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - regret_groups.begin());
    regret_groups[idx].values.push_back(r.regret());
    cu_groups[idx].values.push_back(static_cast<double>(r.uplink_bits));
  }
  auto by_x = [](const AuditGroup& a, const AuditGroup& b) { return a.x < b.x; };
  std::sort(regret_groups.begin(), regret_groups.end(), by_x);
  std::sort(cu_groups.begin(), cu_groups.end(), by_x);

  AuditReport report;
  AuditLine regret_line;
  regret_line.metric = "regret";
  regret_line.axis = axis;
  regret_line.fit = fit_groups(regret_groups, AxisTransform::kLogLog, 1000, seed);
  regret_line.band = axis == "T" ? bands.regret_vs_T : bands.regret_vs_M;
  regret_line.passed = regret_line.fit.slope >= regret_line.band->first && regret_line.fit.slope <= regret_line.band->second;
  report.lines.push_back(regret_line);
  if (axis == "T") {
    AuditLine cu_line;
    cu_line.metric = "c_u_bits";
    cu_line.axis = "log T";
    cu_line.fit = fit_groups(cu_groups, AxisTransform::kLinearVsLog, 1000, seed);
    report.lines.push_back(cu_line);
  }
  return report;
}

}  // namespace pls

#endif  // PLS_SIM_HPP_
