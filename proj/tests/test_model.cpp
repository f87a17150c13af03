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

#include "pls/model.hpp"
#include "pls/rng.hpp"

namespace pls {
namespace {

TEST(Model, NoiselessRewardIsInnerProduct) {
  RandomStream stream(1);
  EXPECT_EQ(pull(BanditInstance({1.0, 0.0}, 0.0), Action{{1.0, 0.0}}, stream), 1.0);
  EXPECT_DOUBLE_EQ(pull(BanditInstance({0.6, 0.8}, 0.0), Action{{0.0, 1.0}}, stream), 0.8);
}

TEST(Model, PureNoiseSampleMeanNearZero) {
  const BanditInstance env({0.0, 0.0, 0.0}, 1.0);
  RandomStream stream(42, StreamTag::kRewardNoise);
  const Action a{{0.3, -0.4, 0.5}};
  KahanSum sum;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum.add(pull(env, a, stream));
  // 3 sigma / sqrt(N) = 0.003, well inside the 0.01 tolerance.
  EXPECT_LT(std::abs(sum.value() / n), 0.01);
}

TEST(Model, RejectsBadInstancesAndActions) {
  EXPECT_THROW(BanditInstance({0.9, 0.9}, 0.1), PreconditionError);
  EXPECT_THROW(BanditInstance({0.1}, -1.0), PreconditionError);
  EXPECT_THROW(BanditInstance({}, 0.1), PreconditionError);
  EXPECT_THROW(BanditInstance({0.1, 0.1, 0.0}, 0.1, 1), PreconditionError);
  const BanditInstance env({0.5, 0.0}, 0.0);
  RandomStream stream(1);
  EXPECT_THROW(pull(env, Action{{1.0, 1.0}}, stream), PreconditionError);
  EXPECT_THROW(pull(env, Action{{1.0}}, stream), PreconditionError);
}

TEST(Model, InstantaneousRegret) {
  const BanditInstance env({0.8, 0.0}, 0.0);
  EXPECT_EQ(instantaneous_regret(env, Action{{1.0, 0.0}}), 0.0);
  EXPECT_DOUBLE_EQ(instantaneous_regret(env, Action{{0.0, 1.0}}), 0.8);
  // 0.8 - 0.8 * 0.8 / sqrt(0.65)
  const double expected = 0.8 - 0.64 / std::sqrt(0.65);
  const double r = regret_of_estimate(env, Vec{0.8, 0.1});
  EXPECT_NEAR(r, expected, 1e-15);
  EXPECT_NEAR(r, 0.00618, 1e-5);
  EXPECT_LE(r, 0.1 * 0.1 / 0.8);
  EXPECT_THROW(regret_of_estimate(env, Vec{0.0, 0.0}), PreconditionError);
}

TEST(Model, SampleInstance) {
  const BanditInstance zero = sample_instance(5, 0.0, std::nullopt, 3);
  for (double v : zero.theta_star()) EXPECT_EQ(v, 0.0);

  const BanditInstance one = sample_instance(4, 0.7, 1, 9);
  int nonzero = 0;
  for (double v : one.theta_star()) nonzero += v != 0.0;
  EXPECT_EQ(nonzero, 1);
  EXPECT_NEAR(one.theta_norm(), 0.7, 1e-12);

  const BanditInstance a = sample_instance(10, 0.5, 3, 77);
  const BanditInstance b = sample_instance(10, 0.5, 3, 77);
  EXPECT_EQ(a.theta_star(), b.theta_star());
  EXPECT_NE(a.theta_star(), sample_instance(10, 0.5, 3, 78).theta_star());
  EXPECT_NEAR(sample_instance(6, 1.0, std::nullopt, 5).theta_norm(), 1.0, 1e-12);
  EXPECT_LE(sample_instance(6, 1.0, std::nullopt, 5).theta_norm(), 1.0);
}

TEST(Rng, DerivedStreamsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(1, StreamTag::kRewardNoise, {0}), derive_seed(1, StreamTag::kRewardNoise, {0}));
  EXPECT_NE(derive_seed(1, StreamTag::kRewardNoise, {0}), derive_seed(1, StreamTag::kRewardNoise, {1}));
  EXPECT_NE(derive_seed(1, StreamTag::kRewardNoise, {0}), derive_seed(1, StreamTag::kQuantizer, {0}));
  EXPECT_NE(derive_seed(1, StreamTag::kRewardNoise, {0}), derive_seed(2, StreamTag::kRewardNoise, {0}));
  RandomStream a(5, StreamTag::kQuantizer, {2});
  RandomStream b(5, StreamTag::kQuantizer, {2});
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.uniform(), b.uniform());
}

TEST(Common, KahanSumBeatsNaiveAccumulation) {
  KahanSum k;
  double naive = 0.0;
  for (int i = 0; i < 10000000; ++i) {
    k.add(0.1);
    naive += 0.1;
  }
  EXPECT_NEAR(k.value(), 1e6, 1e-9);
  EXPECT_GT(std::abs(naive - 1e6), 1e-6);
}

}  // namespace
}  // namespace pls
