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

// Agent and server state machines of the PLS protocol: a norm-estimation
// stage of pure exploration followed by refinement epochs that interleave
// exploration, differential quantized sharing and exploitation.
//
// The same machines run Sparse-PLS when built over a SensingDesign: the
// agents explore the m sensing rows instead of the standard basis, the
// uplink lives in R^m and the server estimates with the LASSO.

#ifndef PLS_PROTOCOL_HPP_
#define PLS_PROTOCOL_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pls/codec.hpp"
#include "pls/common.hpp"
#include "pls/model.hpp"
#include "pls/quant.hpp"
#include "pls/rng.hpp"
#include "pls/schedule.hpp"
#include "pls/sparse.hpp"

namespace pls {

enum class Phase { kNormEstimation, kRefinement, kDone };

/// Actions played during exploration, known a priori to every party: the
/// standard basis of R^d, or the rows of a shared sensing design.
class ExplorationSet {
 public:
  static ExplorationSet standard_basis(std::size_t d) {
    require(d >= 1, "ExplorationSet: d must be >= 1");
    ExplorationSet set;
    set.d_ = d;
    return set;
  }
  static ExplorationSet sensing(std::shared_ptr<const SensingDesign> design) {
    require(design != nullptr, "ExplorationSet: null design");
    ExplorationSet set;
    set.d_ = design->d();
    set.design_ = std::move(design);
    return set;
  }

  bool sparse() const { return design_ != nullptr; }
  std::size_t dim() const { return d_; }
  /// Number of distinct exploration actions (the uplink dimension).
  std::size_t size() const { return design_ ? design_->m() : d_; }
  const SensingDesign* design() const { return design_.get(); }

  Action action(std::size_t i) const {
    if (design_) {
      auto r = design_->row(i);
      return Action{Vec(r.begin(), r.end())};
    }
    Vec e(d_, 0.0);
    e[i] = 1.0;
    return Action{std::move(e)};
  }

  /// Maps an R^d vector into uplink coordinates (identity, or X theta).
  Vec project(std::span<const double> theta) const {
    if (design_) return design_->apply(theta);
    return Vec(theta.begin(), theta.end());
  }

  /// Expected reward of every exploration action.
  Vec mean_rewards(const BanditInstance& env) const { return project(env.theta_star()); }

 private:
  ExplorationSet() = default;
  std::size_t d_ = 0;
  std::shared_ptr<const SensingDesign> design_;
};

/// Agent-to-server message. `raw` carries the exact vector only in the
/// unquantized baseline, where `bits` stays empty.
struct Uplink {
  std::size_t agent = 0;
  int epoch = 0;
  BitMessage bits;
  std::optional<Vec> raw;
};

/// Server broadcast after a refinement exploration sub-epoch.
struct Downlink {
  int epoch = 0;
  BitMessage bits;
  std::optional<Vec> raw;
};

struct ExplorationResult {
  std::optional<Vec> estimate;  // empty when the budget cut the sub-epoch short
  std::int64_t pulls = 0;
};

namespace detail {

inline QuantGrid uplink_grid(const EpochParams& p, std::size_t dim) {
  return vector_grid(dim, p.alpha, p.uplink_radius());
}

inline QuantGrid downlink_grid(const EpochParams& p, std::size_t dim) {
  return vector_grid(dim, p.beta, p.downlink_radius());
}

}  // namespace detail

class Agent {
 public:
  Agent(std::size_t id, std::shared_ptr<const EpochSchedule> schedule, ExplorationSet set, std::uint64_t run_seed,
        bool quantize = true)
      : id_(id),
        schedule_(std::move(schedule)),
        set_(std::move(set)),
        noise_(run_seed, StreamTag::kRewardNoise, {id}),
        quant_(run_seed, StreamTag::kQuantizer, {id}),
        quantize_(quantize),
        theta_bar_(set_.dim(), 0.0) {}

  std::size_t id() const { return id_; }
  Phase phase() const { return phase_; }
  int epoch() const { return epoch_; }
  std::optional<int> k0() const { return k0_; }
  const Vec& theta_bar() const { return theta_bar_; }
  std::optional<double> mu0() const { return mu0_; }
  std::int64_t pulls_used() const { return pulls_used_; }
  /// True once refinement has gone past the last scheduled epoch; the agent
  /// then exploits theta_bar for the rest of the horizon.
  bool schedule_exhausted() const { return epoch_ > schedule_->K(); }

  /// Plays each exploration action s_k times in round-robin order and returns
  /// the per-action sample means. A sub-epoch cut short by the budget yields
  /// no estimate and ends the agent's participation.
  ExplorationResult explore_epoch(const BanditInstance& env) {
    require(phase_ != Phase::kDone, "explore_epoch: agent is done");
    require(!schedule_exhausted(), "explore_epoch: no scheduled epoch left");
    const EpochParams& p = schedule_->at(epoch_);
    const std::size_t n = set_.size();
    const std::int64_t needed = static_cast<std::int64_t>(n) * p.s;
    const std::int64_t remaining = schedule_->config().T - pulls_used_;
    require(remaining >= 1, "explore_epoch: budget exhausted");
    ExplorationResult out;
    if (needed > remaining) {
      // Statistically useless for the envelope; rewards are not drawn.
      out.pulls = remaining;
      pulls_used_ += remaining;
      phase_ = Phase::kDone;
      return out;
    }
    const Vec means = set_.mean_rewards(env);
    Vec sums(n, 0.0);
    const double sigma = env.sigma();
    if (sigma == 0.0) {
      for (std::size_t i = 0; i < n; ++i) sums[i] = means[i] * static_cast<double>(p.s);
    } else {
      for (std::int64_t rep = 0; rep < p.s; ++rep) {
        for (std::size_t i = 0; i < n; ++i) sums[i] += means[i] + sigma * noise_.gaussian();
      }
    }
    Vec estimate(n);
    for (std::size_t i = 0; i < n; ++i) estimate[i] = sigma == 0.0 ? means[i] : sums[i] / static_cast<double>(p.s);
    out.estimate = std::move(estimate);
    out.pulls = needed;
    pulls_used_ += needed;
    return out;
  }

  /// Clip(estimate - proj(theta_bar), R_k + B_k), stochastically quantized at
  /// alpha_k and unary-encoded.
  Uplink uplink(std::span<const double> estimate) {
    const EpochParams& p = schedule_->at(epoch_);
    require(estimate.size() == set_.size(), "uplink: estimate has the wrong dimension");
    const Vec diff = sub(estimate, set_.project(theta_bar_));
    const Vec clipped = clip(diff, p.uplink_radius());
    Uplink msg;
    msg.agent = id_;
    msg.epoch = epoch_;
    if (!quantize_) {
      msg.raw = clipped;
      msg.bits = BitMessage(Direction::kUplink, epoch_, Encoding::kUnary);
      return msg;
    }
    const QuantizedVector q = sto_quant(clipped, p.alpha, p.uplink_radius(), quant_);
    msg.bits = encode_unary(q, Direction::kUplink, epoch_);
    return msg;
  }

  /// Reads the server's 1-bit terminate/continue broadcast.
  void on_norm_decision(const BitMessage& control) {
    require(phase_ == Phase::kNormEstimation, "on_norm_decision: not in norm estimation");
    require(control.size() == 1 && control.encoding() == Encoding::kControl, "on_norm_decision: bad control message");
    if (control[0]) {
      phase_ = Phase::kRefinement;
      k0_ = epoch_;
      theta_bar_.assign(set_.dim(), 0.0);
    } else {
      ++epoch_;
      require(epoch_ <= schedule_->K(), "on_norm_decision: continue past the last epoch");
    }
  }

  /// Applies the quantized update theta_bar_k = theta_bar_{k-1} + Q(update).
  void on_refinement_broadcast(const Downlink& down) {
    require(phase_ == Phase::kRefinement, "on_refinement_broadcast: not in refinement");
    require(down.epoch == epoch_, "on_refinement_broadcast: epoch mismatch");
    Vec update;
    if (down.raw) {
      update = *down.raw;
    } else {
      const QuantGrid grid = detail::downlink_grid(schedule_->at(epoch_), set_.dim());
      update = epoch_ == *k0_ ? decode_fixed(down.bits, set_.dim(), grid).values()
                              : decode_unary(down.bits, set_.dim(), grid).values();
    }
    for (std::size_t i = 0; i < update.size(); ++i) theta_bar_[i] += update[i];
    if (epoch_ == *k0_) mu0_ = norm2(theta_bar_);
  }

  /// Length of the exploitation sub-epoch after the current broadcast,
  /// truncated to the remaining budget. Zero when theta_bar has no direction.
  std::int64_t exploitation_rounds() const {
    require(phase_ == Phase::kRefinement && mu0_.has_value(), "exploitation_rounds: no shared estimate yet");
    if (norm2(theta_bar_) == 0.0) return 0;
    const std::int64_t t_k = schedule_->exploitation_length(epoch_, *mu0_);
    return std::min(t_k, schedule_->config().T - pulls_used_);
  }

  /// a = theta_bar / ||theta_bar||, or the zero action when theta_bar = 0.
  Action exploit_action() const {
    const double n = norm2(theta_bar_);
    if (n == 0.0) return Action{Vec(set_.dim(), 0.0)};
    return Action{scaled(theta_bar_, 1.0 / n)};
  }

  /// Records `rounds` exploitation pulls and moves to the next epoch.
  void exploit(std::int64_t rounds) {
    require(rounds >= 0 && pulls_used_ + rounds <= schedule_->config().T, "exploit: exceeds the horizon");
    pulls_used_ += rounds;
    if (pulls_used_ == schedule_->config().T) phase_ = Phase::kDone;
  }

  void next_epoch() {
    require(phase_ == Phase::kRefinement, "next_epoch: only refinement epochs advance here");
    ++epoch_;
  }

 private:
  std::size_t id_;
  std::shared_ptr<const EpochSchedule> schedule_;
  ExplorationSet set_;
  RandomStream noise_;
  RandomStream quant_;
  bool quantize_;
  Phase phase_ = Phase::kNormEstimation;
  int epoch_ = 1;
  std::optional<int> k0_;
  std::optional<double> mu0_;
  Vec theta_bar_;
  std::int64_t pulls_used_ = 0;
};

enum class NormDecision { kContinue, kTerminate };

class Server {
 public:
  Server(std::shared_ptr<const EpochSchedule> schedule, ExplorationSet set, bool quantize = true,
         LassoOptions lasso = {})
      : schedule_(std::move(schedule)),
        set_(std::move(set)),
        quantize_(quantize),
        lasso_(lasso),
        theta_bar_(set_.dim(), 0.0) {}

  Phase phase() const { return phase_; }
  int epoch() const { return epoch_; }
  std::optional<int> k0() const { return k0_; }
  const Vec& theta_bar() const { return theta_bar_; }
  /// theta_hat^(serv) of the most recent step.
  const Vec& estimate() const { return estimate_; }
  /// Whether the most recent LASSO solve converged (always true in dense mode).
  bool last_solve_converged() const { return last_converged_; }

  /// Averages the decoded uplinks and applies the threshold test
  /// tau_k <= ||theta_hat|| / 4; termination is forced at k = K.
  NormDecision norm_step(std::span<const Uplink> uplinks) {
    require(phase_ == Phase::kNormEstimation, "norm_step: not in norm estimation");
    estimate_ = aggregate(uplinks);
    const EpochParams& p = schedule_->at(epoch_);
    const bool terminate = p.tau <= norm2(estimate_) / 4.0 || epoch_ == schedule_->K();
    if (terminate) {
      k0_ = epoch_;
      phase_ = Phase::kRefinement;
      theta_bar_.assign(set_.dim(), 0.0);
      return NormDecision::kTerminate;
    }
    ++epoch_;
    return NormDecision::kContinue;
  }

  /// theta_hat = theta_bar + aggregate; broadcasts DetQuant(theta_hat -
  /// theta_bar, beta_k, B_k + tau_k) and applies the same update locally.
  Downlink refine_step(std::span<const Uplink> uplinks) {
    require(phase_ == Phase::kRefinement, "refine_step: not in refinement");
    const EpochParams& p = schedule_->at(epoch_);
    estimate_ = aggregate(uplinks);
    const Vec diff = clip(sub(estimate_, theta_bar_), p.downlink_radius());
    Downlink down;
    down.epoch = epoch_;
    Vec update;
    if (quantize_) {
      const QuantizedVector q = det_quant(diff, p.beta, p.downlink_radius());
      down.bits = epoch_ == *k0_ ? encode_fixed(q, Direction::kDownlink, epoch_)
                                 : encode_unary(q, Direction::kDownlink, epoch_);
      update = q.values();
    } else {
      down.bits = BitMessage(Direction::kDownlink, epoch_, Encoding::kUnary);
      down.raw = diff;
      update = diff;
    }
    for (std::size_t i = 0; i < update.size(); ++i) theta_bar_[i] += update[i];
    ++epoch_;
    return down;
  }

 private:
  // Decodes every uplink, averages them and turns the average into an R^d
  // estimate around theta_bar.
  Vec aggregate(std::span<const Uplink> uplinks) {
    const std::size_t M = schedule_->config().M;
    if (uplinks.size() != M) {
      throw ProtocolError("epoch " + std::to_string(epoch_) + ": expected " + std::to_string(M) +
                          " uplinks, got " + std::to_string(uplinks.size()));
    }
    const EpochParams& p = schedule_->at(epoch_);
    const std::size_t n = set_.size();
    const QuantGrid grid = detail::uplink_grid(p, n);
    Vec mean(n, 0.0);
    for (const Uplink& u : uplinks) {
      if (u.epoch != epoch_) throw ProtocolError("uplink from a different epoch");
      const Vec values = u.raw ? *u.raw : decode_unary(u.bits, n, grid).values();
      for (std::size_t i = 0; i < n; ++i) mean[i] += values[i];
    }
    for (double& v : mean) v /= static_cast<double>(M);

    if (!set_.sparse()) {
      last_converged_ = true;
      return add(theta_bar_, mean);
    }
    LassoProblem problem{*set_.design(), mean, theta_bar_, p.lambda};
    LassoResult solved = lasso_solve(problem, lasso_);
    last_converged_ = solved.converged;
    return std::move(solved.theta);
  }

  std::shared_ptr<const EpochSchedule> schedule_;
  ExplorationSet set_;
  bool quantize_;
  LassoOptions lasso_;
  Phase phase_ = Phase::kNormEstimation;
  int epoch_ = 1;
  std::optional<int> k0_;
  Vec theta_bar_;
  Vec estimate_;
  bool last_converged_ = true;
};

}  // namespace pls

#endif  // PLS_PROTOCOL_HPP_
