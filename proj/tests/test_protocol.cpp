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

#include <cmath>
#include <gtest/gtest.h>

#include "pls/protocol.hpp"

namespace pls {
namespace {

std::shared_ptr<const EpochSchedule> make_schedule(std::size_t d, std::size_t M, std::int64_t T,
                                                   double sigma = 0.5) {
  PolicyConfig c;
  c.d = d;
  c.M = M;
  c.T = T;
  c.sigma = sigma;
  return std::make_shared<const EpochSchedule>(c);
}

struct Party {
  std::shared_ptr<const EpochSchedule> schedule;
  std::vector<Agent> agents;
  Server server;

  Party(std::shared_ptr<const EpochSchedule> s, std::uint64_t seed)
      : schedule(std::move(s)), server(schedule, ExplorationSet::standard_basis(schedule->config().d)) {
    for (std::size_t j = 0; j < schedule->config().M; ++j)
      agents.emplace_back(j, schedule, ExplorationSet::standard_basis(schedule->config().d), seed);
  }

  std::vector<Uplink> explore(const BanditInstance& env) {
    std::vector<Uplink> ups;
    for (Agent& a : agents) ups.push_back(a.uplink(*a.explore_epoch(env).estimate));
    return ups;
  }

  // Runs norm estimation to termination; returns k0.
  int estimate_norm(const BanditInstance& env) {
    while (true) {
      const auto ups = explore(env);
      const bool stop = server.norm_step(ups) == NormDecision::kTerminate;
      const BitMessage control = control_message(stop, agents.front().epoch());
      for (Agent& a : agents) a.on_norm_decision(control);
      if (stop) return *server.k0();
    }
  }
};

TEST(Agent, NoiselessExplorationIsExact) {
  auto s = make_schedule(2, 1, 100000000);
  Agent a(0, s, ExplorationSet::standard_basis(2), 1);
  const BanditInstance env({0.6, -0.3}, 0.0);
  const ExplorationResult r = a.explore_epoch(env);
  EXPECT_EQ(*r.estimate, env.theta_star());
  EXPECT_EQ(r.pulls, 2 * s->at(1).s);
  EXPECT_EQ(a.pulls_used(), 2 * s->at(1).s);
}

TEST(Agent, EstimateInsideEnvelope) {
  auto s = make_schedule(3, 1, 100000000, 1.0);
  const BanditInstance env({0.2, 0.1, -0.4}, 1.0);
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Agent a(0, s, ExplorationSet::standard_basis(3), seed);
    const Vec est = *a.explore_epoch(env).estimate;
    inside += distance(est, env.theta_star()) <= s->at(1).R;
  }
  EXPECT_GE(inside, 190);
}

TEST(Agent, BudgetCutsExplorationShort) {
  auto s = make_schedule(2, 1, 500);
  Agent a(0, s, ExplorationSet::standard_basis(2), 1);
  const ExplorationResult r = a.explore_epoch(BanditInstance({0.5, 0.0}, 0.5));
  EXPECT_FALSE(r.estimate.has_value());
  EXPECT_EQ(r.pulls, 500);
  EXPECT_EQ(a.phase(), Phase::kDone);
}

TEST(Agent, UplinkOfZeroDifference) {
  auto s = make_schedule(4, 2, 100000000);
  Agent a(0, s, ExplorationSet::standard_basis(4), 1);
  const Uplink u = a.uplink(Vec(4, 0.0));  // theta_bar = 0 during norm estimation
  EXPECT_EQ(u.bits.size(), 12u);
  EXPECT_EQ(decode_unary(u.bits, 4), std::vector<std::int64_t>(4, 0));
}

TEST(Agent, UplinkClipsAndMatchesReplayedQuantizer) {
  auto s = make_schedule(3, 2, 100000000);
  const EpochParams& p = s->at(1);
  Agent a(1, s, ExplorationSet::standard_basis(3), 77);
  const Vec far{3.0, -4.0, 12.0};
  const Uplink u = a.uplink(far);
  const QuantGrid grid = vector_grid(3, p.alpha, p.uplink_radius());
  const Vec decoded = decode_unary(u.bits, 3, grid).values();
  EXPECT_LE(norm2(decoded), p.uplink_radius() + p.alpha + 1e-12);

  RandomStream replay(77, StreamTag::kQuantizer, {1});
  const Vec expected = sto_quant(clip(far, p.uplink_radius()), p.alpha, p.uplink_radius(), replay).values();
  EXPECT_EQ(decoded, expected);
}

TEST(Server, NormThreshold) {
  auto s = make_schedule(2, 4, 100000000);
  Server server(s, ExplorationSet::standard_basis(2));
  std::vector<Uplink> zero;
  for (std::size_t j = 0; j < 4; ++j) zero.push_back({j, 1, encode_unary(std::vector<std::int64_t>(2, 0)), {}});
  EXPECT_EQ(server.norm_step(zero), NormDecision::kContinue);
  EXPECT_EQ(server.epoch(), 2);
  EXPECT_DOUBLE_EQ(s->at(3).tau, 0.09375);
}

TEST(Server, MissingUplinkIsAProtocolError) {
  auto s = make_schedule(2, 4, 100000000);
  Server server(s, ExplorationSet::standard_basis(2));
  std::vector<Uplink> three;
  for (std::size_t j = 0; j < 3; ++j) three.push_back({j, 1, encode_unary(std::vector<std::int64_t>(2, 0)), {}});
  EXPECT_THROW(server.norm_step(three), ProtocolError);
}

TEST(Protocol, NoiselessNormEstimationStopsAtThree) {
  // ||theta*|| = 0.5, M = 4: tau_3 = 0.09375 <= 0.125 < tau_2.
  Party party(make_schedule(2, 4, 100000000), 3);
  const BanditInstance env({0.3, 0.4}, 0.0);
  EXPECT_EQ(party.estimate_norm(env), 3);
  for (const Agent& a : party.agents) {
    EXPECT_EQ(a.k0(), 3);
    EXPECT_EQ(a.epoch(), 3);
    EXPECT_EQ(a.theta_bar(), Vec(2, 0.0));
    EXPECT_FALSE(a.mu0().has_value());
  }
}

TEST(Protocol, RefinementKeepsAgentsInSyncAndWithinEnvelope) {
  Party party(make_schedule(2, 4, 100000000), 5);
  const BanditInstance env({0.3, 0.4}, 0.0);
  const int k0 = party.estimate_norm(env);
  int refined = 0;
  for (int k = k0; k < party.schedule->K(); ++k) {
    const Downlink down = party.server.refine_step(party.explore(env));
    EXPECT_EQ(down.bits.encoding(), k == k0 ? Encoding::kFixed : Encoding::kUnary);
    for (Agent& a : party.agents) {
      a.on_refinement_broadcast(down);
      ASSERT_EQ(a.theta_bar(), party.server.theta_bar());
    }
    EXPECT_LE(distance(party.server.theta_bar(), env.theta_star()), party.schedule->at(k).tau);
    EXPECT_LE(distance(party.server.estimate(), env.theta_star()), party.schedule->at(k).tau);
    const Agent& lead = party.agents.front();
    if (k == k0) {
      EXPECT_DOUBLE_EQ(*lead.mu0(), norm2(party.server.theta_bar()));
    }
    // Per-round regret against the squared-error oracle.
    const double err = distance(lead.theta_bar(), env.theta_star());
    EXPECT_LE(instantaneous_regret(env, lead.exploit_action()), err * err / env.theta_norm() + 1e-12);
    for (Agent& a : party.agents) {
      a.exploit(0);
      a.next_epoch();
    }
    ++refined;
  }
  EXPECT_GE(refined, 2);
}

TEST(Protocol, ZeroUpdateWhenEstimateEqualsSharedValue) {
  Party party(make_schedule(2, 2, 100000000), 6);
  const BanditInstance env({0.3, 0.4}, 0.0);
  party.estimate_norm(env);
  Downlink down = party.server.refine_step(party.explore(env));
  for (Agent& a : party.agents) {
    a.on_refinement_broadcast(down);
    a.next_epoch();
  }
  const Vec before = party.server.theta_bar();
  std::vector<Uplink> ups;
  for (Agent& a : party.agents) ups.push_back(a.uplink(a.theta_bar()));
  down = party.server.refine_step(ups);
  EXPECT_EQ(decode_unary(down.bits, 2), std::vector<std::int64_t>(2, 0));
  for (Agent& a : party.agents) {
    a.on_refinement_broadcast(down);
    EXPECT_EQ(a.theta_bar(), before);
  }
}

TEST(Protocol, ZeroSharedEstimateSkipsExploitation) {
  auto s = make_schedule(2, 1, 100000000);
  Agent a(0, s, ExplorationSet::standard_basis(2), 1);
  a.on_norm_decision(control_message(true, 1));
  const QuantGrid grid = detail::downlink_grid(s->at(1), 2);
  a.on_refinement_broadcast(Downlink{1, encode_fixed(QuantizedVector{{0, 0}, grid}, Direction::kDownlink, 1), {}});
  EXPECT_EQ(a.mu0(), 0.0);
  EXPECT_EQ(a.exploitation_rounds(), 0);
  EXPECT_EQ(a.exploit_action().direction, Vec(2, 0.0));
}

}  // namespace
}  // namespace pls
