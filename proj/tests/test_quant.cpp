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

#include "pls/quant.hpp"
#include "pls/rng.hpp"

namespace pls {
namespace {

TEST(Grid, LevelsAndPoints) {
  const QuantGrid g(1.0, 0.5);
  EXPECT_EQ(g.levels(), 4);
  EXPECT_EQ(g.max_index(), 2);
  EXPECT_EQ(g.point(0), -1.0);
  EXPECT_EQ(g.point(1), -0.5);
  EXPECT_EQ(g.point(2), 0.0);
  EXPECT_EQ(g.point(3), 0.5);
  EXPECT_EQ(g.point(4), 1.0);
  for (double eps : {0.3, 0.07, 0.011, 1e-4}) {
    const QuantGrid h(0.77, eps);
    EXPECT_EQ(h.levels() % 2, 0);
    EXPECT_GE(h.levels(), static_cast<std::int64_t>(std::ceil(2 * 0.77 / eps)));
    EXPECT_LE(h.spacing(), eps * (1 + 1e-15));
    EXPECT_EQ(h.point(0), -0.77);
    EXPECT_EQ(h.point(h.levels()), 0.77);
    EXPECT_EQ(h.point(h.levels() / 2), 0.0);
  }
  EXPECT_THROW(QuantGrid(0.0, 0.1), PreconditionError);
  EXPECT_THROW(QuantGrid(1.0, 0.0), PreconditionError);
}

TEST(Clip, Examples) {
  EXPECT_EQ(clip(Vec{0.3, 0.4}, 1.0), (Vec{0.3, 0.4}));
  const Vec c = clip(Vec{3.0, 4.0}, 1.0);
  EXPECT_DOUBLE_EQ(c[0], 0.6);
  EXPECT_DOUBLE_EQ(c[1], 0.8);
  EXPECT_EQ(clip(Vec{0.0, 0.0}, 2.5), (Vec{0.0, 0.0}));
}

TEST(StoQuant, GridPointsAreFixed) {
  const QuantGrid g(1.0, 0.5);
  RandomStream s(3);
  for (std::int64_t m = 0; m <= 4; ++m)
    for (int i = 0; i < 100; ++i) ASSERT_EQ(g.value(sto_quant_scalar(g.point(m), g, s)), g.point(m));
}

TEST(StoQuant, MidpointSplitsEvenly) {
  const QuantGrid g(1.0, 0.5);
  RandomStream s(11, StreamTag::kQuantizer);
  int upper = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double v = g.value(sto_quant_scalar(0.25, g, s));
    ASSERT_TRUE(v == 0.0 || v == 0.5);
    upper += v == 0.5;
  }
  EXPECT_NEAR(static_cast<double>(upper) / n, 0.5, 0.015);
}

TEST(StoQuant, Unbiased) {
  const QuantGrid g(1.0, 0.5);
  RandomStream s(12, StreamTag::kQuantizer);
  KahanSum sum;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum.add(g.value(sto_quant_scalar(0.25, g, s)));
  EXPECT_NEAR(sum.value() / n, 0.25, 0.005);
}

TEST(StoQuant, ConsumesOneDrawPerCall) {
  const QuantGrid g(1.0, 0.5);
  RandomStream a(5), b(5);
  sto_quant_scalar(0.5, g, a);  // grid point
  sto_quant_scalar(0.1, g, a);
  b.uniform();
  b.uniform();
  EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(DetQuant, Examples) {
  const QuantGrid g(1.0, 0.5);
  EXPECT_EQ(g.value(det_quant_scalar(0.2, g)), 0.0);
  EXPECT_EQ(g.value(det_quant_scalar(0.25, g)), 0.5);
  EXPECT_EQ(g.value(det_quant_scalar(-1.0, g)), -1.0);
  EXPECT_EQ(g.value(det_quant_scalar(1.0, g)), 1.0);
  EXPECT_EQ(g.value(det_quant_scalar(-0.25, g)), 0.0);
  EXPECT_THROW(det_quant_scalar(1.5, g), PreconditionError);
}

TEST(VectorQuant, ZeroAndDimensionOne) {
  const QuantizedVector z = det_quant(Vec{0.0, 0.0, 0.0}, 0.1, 1.0);
  for (auto q : z.indices) EXPECT_EQ(q, 0);
  for (double v : z.values()) EXPECT_EQ(v, 0.0);

  const QuantGrid g(0.9, 0.13);
  RandomStream a(8), b(8);
  for (double y : {-0.9, -0.41, 0.0, 0.333, 0.9}) {
    EXPECT_EQ(det_quant(Vec{y}, 0.13, 0.9).indices[0], det_quant_scalar(y, g));
    EXPECT_EQ(sto_quant(Vec{y}, 0.13, 0.9, a).indices[0], sto_quant_scalar(y, g, b));
  }
}

TEST(VectorQuant, ErrorWithinResolution) {
  RandomStream data(21), q(22);
  const double r = 1.3, eps = 0.07;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t p = 1 + data.bits() % 8;
    Vec x(p);
    for (double& v : x) v = data.gaussian();
    x = scaled(x, r * data.uniform() / norm2(x));
    ASSERT_LE(distance(sto_quant(x, eps, r, q).values(), x), eps + 1e-12);
    ASSERT_LE(distance(det_quant(x, eps, r).values(), x), eps + 1e-12);
  }
  EXPECT_THROW(det_quant(Vec{2.0, 0.0}, eps, 1.0), PreconditionError);
}

}  // namespace
}  // namespace pls
