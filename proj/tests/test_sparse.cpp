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

#include <Eigen/Dense>
#include <cmath>
#include <gtest/gtest.h>

#include "pls/sparse.hpp"

namespace pls {
namespace {

Eigen::MatrixXd to_eigen(const SensingDesign& x) {
  Eigen::MatrixXd out(x.m(), x.d());
  for (std::size_t i = 0; i < x.m(); ++i)
    for (std::size_t j = 0; j < x.d(); ++j) out(i, j) = x(i, j);
  return out;
}

Vec planted(std::size_t d, std::vector<std::pair<std::size_t, double>> entries) {
  Vec theta(d, 0.0);
  for (auto [j, v] : entries) theta[j] = v;
  return theta;
}

// Best-subset least squares over all supports of size s; the oracle the
// LASSO must match on noiseless planted instances.
Vec best_subset(const SensingDesign& x, const Vec& y, std::size_t s) {
  const Eigen::MatrixXd X = to_eigen(x);
  const Eigen::VectorXd Y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  const std::size_t d = x.d();
  Vec best(d, 0.0);
  double best_rss = Y.squaredNorm();
  std::vector<bool> mask(d, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(s), true);
  do {
    std::vector<Eigen::Index> cols;
    for (std::size_t j = 0; j < d; ++j)
      if (mask[j]) cols.push_back(static_cast<Eigen::Index>(j));
    Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = X.col(cols[c]);
    const Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(Y);
    const double rss = (Y - sub * coef).squaredNorm();
    if (rss < best_rss) {
      best_rss = rss;
      best.assign(d, 0.0);
      for (std::size_t c = 0; c < cols.size(); ++c) best[static_cast<std::size_t>(cols[c])] = coef(static_cast<Eigen::Index>(c));
    }
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

TEST(Design, EntriesRowsAndDeterminism) {
  const SensingDesign a(25, 16, 1234), b(25, 16, 1234), c(25, 16, 1235);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  for (std::size_t i = 0; i < a.m(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < a.d(); ++j) {
      EXPECT_EQ(std::abs(a(i, j)), 0.25);
      sq += a(i, j) * a(i, j);
    }
    EXPECT_EQ(sq, 1.0);
  }
  int positives = 0;
  const SensingDesign big(200, 50, 9);
  for (std::size_t i = 0; i < 200; ++i)
    for (std::size_t j = 0; j < 50; ++j) positives += big(i, j) > 0;
  EXPECT_NEAR(positives / 10000.0, 0.5, 0.02);
  EXPECT_EQ(build_design(60, 3, 0.05, 1).m(), 60u);
}

TEST(Design, RestrictedEigenvalueCheck) {
  // Identity-like sanity: a single row d = 1 preserves every norm exactly.
  EXPECT_EQ(re_condition_check(SensingDesign(1, 1, 3), 1, 50), 1.0);
  EXPECT_GE(re_condition_check(build_design(60, 3, 0.05, 17), 3, 1000, 5), 0.95);
  EXPECT_LT(re_condition_check(SensingDesign(1, 400, 17), 3, 1000, 5), 0.5);
}

TEST(Lasso, ZeroPenaltyGivesLeastSquares) {
  const SensingDesign x(30, 10, 4);
  RandomStream s(8);
  Vec y(30);
  for (double& v : y) v = s.gaussian();
  const LassoProblem p{x, y, Vec(10, 0.0), 0.0};
  const LassoResult r = lasso_solve(p, {1e-12, 100000, false});
  ASSERT_TRUE(r.converged);
  const Eigen::MatrixXd X = to_eigen(x);
  const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(r.theta.data(), 10);
  const Eigen::VectorXd Y = Eigen::Map<const Eigen::VectorXd>(y.data(), 30);
  EXPECT_LT((X.transpose() * (Y - X * theta)).cwiseAbs().maxCoeff(), 1e-9);
  const Eigen::VectorXd ls = X.colPivHouseholderQr().solve(Y);
  EXPECT_LT((ls - theta).norm(), 1e-8);
}

TEST(Lasso, LargePenaltyKillsEverything) {
  const SensingDesign x(20, 40, 4);
  RandomStream s(9);
  Vec y(20);
  for (double& v : y) v = s.gaussian();
  const Vec zero(40, 0.0);
  const LassoProblem probe{x, y, zero, 0.0};
  const Vec g = lasso_gradient(probe, zero);
  double g_max = 0.0;
  for (double v : g) g_max = std::max(g_max, std::abs(v));
  // -2 (d/m) X^T y, computed here from the definition.
  for (std::size_t j = 0; j < 40; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < 20; ++i) col += x(i, j) * y[i];
    EXPECT_NEAR(g[j], -2.0 * 2.0 * col, 1e-12);
  }
  const LassoResult r = lasso_solve({x, y, zero, g_max * 1.0001});
  for (double v : r.theta) EXPECT_EQ(v, 0.0);
  const LassoResult below = lasso_solve({x, y, zero, g_max * 0.9});
  EXPECT_GT(norm2(below.theta), 0.0);
}

TEST(Lasso, MonotoneObjectiveAndKkt) {
  RandomStream s(10);
  for (int trial = 0; trial < 20; ++trial) {
    const SensingDesign x(15 + trial, 30, 100 + static_cast<std::uint64_t>(trial));
    Vec y(x.m()), offset(30);
    for (double& v : y) v = s.gaussian();
    for (double& v : offset) v = 0.1 * s.gaussian();
    const LassoProblem p{x, y, offset, 0.05 + 0.1 * s.uniform()};
    const LassoResult r = lasso_solve(p, {1e-10, 100000, true});
    ASSERT_TRUE(r.converged);
    double prev = lasso_objective(p, offset);
    for (double f : r.objective_history) {
      ASSERT_LE(f, prev + 1e-12);
      prev = f;
    }
    EXPECT_LT(kkt_violation(p, r.theta), 1e-6);
  }
}

TEST(Lasso, PlantedRecoveryMatchesBestSubset) {
  const std::size_t d = 40, s = 2;
  const SensingDesign x = build_design(d, s, 0.05, 21);
  const Vec theta = planted(d, {{3, 0.6}, {27, -0.45}});
  const Vec y = x.apply(theta);
  const LassoResult r = lasso_solve({x, y, Vec(d, 0.0), 1e-6}, {1e-12, 100000, false});
  EXPECT_LE(distance(r.theta, theta), 1e-4);
  EXPECT_LE(distance(r.theta, best_subset(x, y, s)), 1e-4);
}

TEST(Lasso, OffsetShiftsTheSolution) {
  const SensingDesign x(40, 40, 5);
  const Vec theta = planted(40, {{1, 0.3}, {2, -0.2}});
  const Vec offset = planted(40, {{1, 0.25}, {2, -0.1}});
  const Vec y = x.apply(sub(theta, offset));  // observations of theta - offset
  const LassoResult r = lasso_solve({x, y, offset, 1e-7}, {1e-12, 100000, false});
  EXPECT_LE(distance(r.theta, theta), 1e-5);
}

TEST(SoftThreshold, Cases) {
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
}

}  // namespace
}  // namespace pls
