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

// Sparse-PLS building blocks: the shared random-sign sensing design, a
// Monte Carlo restricted-eigenvalue diagnostic and the LASSO solver used by
// the server.

#ifndef PLS_SPARSE_HPP_
#define PLS_SPARSE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "pls/common.hpp"
#include "pls/rng.hpp"
#include "pls/schedule.hpp"

namespace pls {

/// m x d matrix with i.i.d. entries uniform on {-1/sqrt(d), +1/sqrt(d)}.
/// Every row is a unit-norm action.
class SensingDesign {
 public:
  SensingDesign(std::size_t m, std::size_t d, std::uint64_t seed) : m_(m), d_(d), seed_(seed), rows_(m * d) {
    require(m >= 1 && d >= 1, "SensingDesign: m and d must be >= 1");
    RandomStream stream(seed, StreamTag::kSensingDesign);
    const double v = 1.0 / std::sqrt(static_cast<double>(d));
    std::uint64_t word = 0;
    int left = 0;
    for (double& x : rows_) {
      if (left == 0) {
        word = stream.bits();
        left = 64;
      }
      x = (word & 1u) ? v : -v;
      word >>= 1;
      --left;
    }
  }

  std::size_t m() const { return m_; }
  std::size_t d() const { return d_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> row(std::size_t i) const { return {rows_.data() + i * d_, d_}; }
  double operator()(std::size_t i, std::size_t j) const { return rows_[i * d_ + j]; }

  Vec apply(std::span<const double> theta) const {
    Vec out(m_);
    for (std::size_t i = 0; i < m_; ++i) out[i] = dot(row(i), theta);
    return out;
  }

  bool operator==(const SensingDesign& o) const { return m_ == o.m_ && d_ == o.d_ && rows_ == o.rows_; }

 private:
  std::size_t m_;
  std::size_t d_;
  std::uint64_t seed_;
  std::vector<double> rows_;
};

/// Builds the design with m from the sparse sizing rule (capped at d).
inline SensingDesign build_design(std::size_t d, std::size_t s, double delta, std::uint64_t seed,
                                  double constant = 80.0) {
  return SensingDesign(sparse_design_size(d, s, delta, constant).m, d, seed);
}

/// Fraction of random s-sparse unit vectors theta with
/// 3/4 <= sqrt(d/m) ||X theta|| <= 5/4.
inline double re_condition_check(const SensingDesign& design, std::size_t s, int trials, std::uint64_t seed = 0) {
  require(trials >= 1, "re_condition_check: trials must be >= 1");
  require(s >= 1 && s <= design.d(), "re_condition_check: s must lie in [1, d]");
  RandomStream stream(seed, StreamTag::kDiagnostic);
  const std::size_t d = design.d();
  const double scale = std::sqrt(static_cast<double>(d) / static_cast<double>(design.m()));
  std::vector<std::size_t> idx(d);
  int passed = 0;
  for (int t = 0; t < trials; ++t) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(stream.bits() % (d - i));
      std::swap(idx[i], idx[j]);
    }
    Vec theta(d, 0.0);
    for (std::size_t i = 0; i < s; ++i) theta[idx[i]] = stream.gaussian();
    const double n = norm2(theta);
    if (n == 0.0) continue;
    for (double& v : theta) v /= n;
    const double r = scale * norm2(design.apply(theta));
    if (r >= 0.75 && r <= 1.25) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(trials);
}

/// argmin_theta (d/m) ||y - X (theta - offset)||^2 + lambda ||theta||_1.
struct LassoProblem {
  const SensingDesign& design;
  Vec y;
  Vec offset;
  double lambda = 0.0;
};

struct LassoOptions {
  double tol = 1e-8;
  int max_sweeps = 100000;
  bool track_objective = false;
};

struct LassoResult {
  Vec theta;
  int sweeps = 0;
  bool converged = false;
  double objective = 0.0;
  std::vector<double> objective_history;  // one entry per sweep when tracked
};

inline double lasso_objective(const LassoProblem& p, std::span<const double> theta) {
  const Vec shifted = sub(theta, p.offset);
  const Vec fit = p.design.apply(shifted);
  double rss = 0.0;
  for (std::size_t i = 0; i < fit.size(); ++i) {
    const double r = p.y[i] - fit[i];
    rss += r * r;
  }
  double l1 = 0.0;
  for (double v : theta) l1 += std::abs(v);
  const double weight = static_cast<double>(p.design.d()) / static_cast<double>(p.design.m());
  return weight * rss + p.lambda * l1;
}

/// Gradient of the smooth part, -2 (d/m) X^T (y - X (theta - offset)).
inline Vec lasso_gradient(const LassoProblem& p, std::span<const double> theta) {
  const Vec fit = p.design.apply(sub(theta, p.offset));
  Vec residual(fit.size());
  for (std::size_t i = 0; i < fit.size(); ++i) residual[i] = p.y[i] - fit[i];
  const double weight = static_cast<double>(p.design.d()) / static_cast<double>(p.design.m());
  Vec g(p.design.d(), 0.0);
  for (std::size_t i = 0; i < p.design.m(); ++i) {
    for (std::size_t j = 0; j < p.design.d(); ++j) g[j] -= 2.0 * weight * p.design(i, j) * residual[i];
  }
  return g;
}

/// Largest subgradient-optimality violation at theta.
inline double kkt_violation(const LassoProblem& p, std::span<const double> theta) {
  const Vec g = lasso_gradient(p, theta);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double v = theta[j] == 0.0 ? std::max(0.0, std::abs(g[j]) - p.lambda)
                                     : std::abs(g[j] + p.lambda * (theta[j] > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

/// Cyclic coordinate descent. Stops when the largest coordinate change in a
/// sweep is <= tol; otherwise returns the last iterate with converged=false.
inline LassoResult lasso_solve(const LassoProblem& p, const LassoOptions& opt = {}) {
  const std::size_t m = p.design.m();
  const std::size_t d = p.design.d();
  require(p.y.size() == m, "lasso_solve: y must have m entries");
  require(p.offset.size() == d, "lasso_solve: offset must have d entries");
  require(p.lambda >= 0.0, "lasso_solve: lambda must be nonnegative");
  require(opt.tol > 0.0, "lasso_solve: tol must be positive");

  const double weight = static_cast<double>(d) / static_cast<double>(m);
  // Column-major copy plus the per-coordinate curvature (d/m) ||x_j||^2.
  std::vector<double> cols(m * d);
  Vec curvature(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      cols[j * m + i] = p.design(i, j);
      curvature[j] += p.design(i, j) * p.design(i, j);
    }
    curvature[j] *= weight;
  }
  const double half_lambda = 0.5 * p.lambda;

  LassoResult out;
  out.theta = p.offset;
  Vec residual = p.y;  // y - X (theta - offset) with theta = offset
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (curvature[j] == 0.0) continue;
      const double* col = cols.data() + j * m;
      double g = 0.0;
      for (std::size_t i = 0; i < m; ++i) g += col[i] * residual[i];
      const double old = out.theta[j];
      const double updated = soft_threshold(curvature[j] * old + weight * g, half_lambda) / curvature[j];
      const double change = updated - old;
      if (change != 0.0) {
        for (std::size_t i = 0; i < m; ++i) residual[i] -= col[i] * change;
        out.theta[j] = updated;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    out.sweeps = sweep + 1;
    if (opt.track_objective) out.objective_history.push_back(lasso_objective(p, out.theta));
    if (max_change <= opt.tol) {
      out.converged = true;
      break;
    }
  }
  out.objective = lasso_objective(p, out.theta);
  return out;
}

}  // namespace pls

#endif  // PLS_SPARSE_HPP_
