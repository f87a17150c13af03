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

// Bandit environment: ground truth, noisy rewards and instantaneous regret.

#ifndef PLS_MODEL_HPP_
#define PLS_MODEL_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pls/common.hpp"
#include "pls/rng.hpp"

namespace pls {

inline constexpr double kActionNormSlack = 1e-9;

struct Action {
  Vec direction;
};

/// Ground-truth linear bandit. Immutable after construction.
class BanditInstance {
 public:
  BanditInstance(Vec theta_star, double sigma, std::optional<std::size_t> sparsity = std::nullopt,
                 std::uint64_t seed = 0)
      : theta_star_(std::move(theta_star)), sigma_(sigma), sparsity_(sparsity), seed_(seed) {
    require(!theta_star_.empty(), "BanditInstance: dimension must be >= 1");
    require(sigma_ >= 0.0, "BanditInstance: sigma must be nonnegative");
    norm_ = norm2(theta_star_);
    require(norm_ <= 1.0 + 1e-12, "BanditInstance: ||theta*|| must be <= 1");
    if (sparsity_) {
      require(*sparsity_ >= 1 && *sparsity_ <= theta_star_.size(),
              "BanditInstance: sparsity must be in [1, d]");
      const auto nonzeros = static_cast<std::size_t>(
          std::count_if(theta_star_.begin(), theta_star_.end(), [](double v) { return v != 0.0; }));
      require(nonzeros <= *sparsity_, "BanditInstance: theta* has more nonzeros than sparsity");
    }
  }

  std::size_t dim() const { return theta_star_.size(); }
  const Vec& theta_star() const { return theta_star_; }
  double sigma() const { return sigma_; }
  std::optional<std::size_t> sparsity() const { return sparsity_; }
  std::uint64_t seed() const { return seed_; }
  double theta_norm() const { return norm_; }

  /// max over the unit ball of <theta*, a>.
  double optimal_value() const { return norm_; }

 private:
  Vec theta_star_;
  double sigma_;
  std::optional<std::size_t> sparsity_;
  std::uint64_t seed_;
  double norm_ = 0.0;
};

inline void check_action(const BanditInstance& instance, const Action& action) {
  require(action.direction.size() == instance.dim(), "action dimension does not match instance");
  require(norm2(action.direction) <= 1.0 + kActionNormSlack, "action lies outside the unit ball");
}

/// Noisy reward <theta*, a> + sigma * N(0, 1).
inline double pull(const BanditInstance& instance, const Action& action, RandomStream& stream) {
  check_action(instance, action);
  const double mean = dot(instance.theta_star(), action.direction);
  if (instance.sigma() == 0.0) return mean;
  return mean + instance.sigma() * stream.gaussian();
}

inline double instantaneous_regret(const BanditInstance& instance, const Action& action) {
  check_action(instance, action);
  return instance.optimal_value() - dot(instance.theta_star(), action.direction);
}

/// Regret of the action a = estimate / ||estimate||. A zero estimate has no
/// direction; callers skip playing it.
inline double regret_of_estimate(const BanditInstance& instance, std::span<const double> estimate) {
  const double n = norm2(estimate);
  require(n > 0.0, "regret_of_estimate: zero estimate has no direction");
  return instance.optimal_value() - dot(instance.theta_star(), estimate) / n;
}

/// Draws theta* uniformly on the sphere of radius `norm`, restricted to a
/// random support of size `sparsity` when given.
inline BanditInstance sample_instance(std::size_t d, double norm, std::optional<std::size_t> sparsity,
                                      std::uint64_t seed, double sigma = 0.0) {
  require(d >= 1, "sample_instance: d must be >= 1");
  require(norm >= 0.0 && norm <= 1.0, "sample_instance: norm must lie in [0, 1]");
  if (sparsity) require(*sparsity >= 1 && *sparsity <= d, "sample_instance: sparsity must be in [1, d]");
  RandomStream stream(seed, StreamTag::kInstance);

  std::vector<std::size_t> support(d);
  std::iota(support.begin(), support.end(), std::size_t{0});
  const std::size_t support_size = sparsity.value_or(d);
  if (support_size < d) {
    // Partial Fisher-Yates with our own stream keeps this portable across
    // standard library implementations.
    for (std::size_t i = 0; i < support_size; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(stream.bits() % (d - i));
      std::swap(support[i], support[j]);
    }
    support.resize(support_size);
    std::sort(support.begin(), support.end());
  }

  Vec theta(d, 0.0);
  if (norm > 0.0) {
    double n = 0.0;
    while (n == 0.0) {
      for (std::size_t i : support) theta[i] = stream.gaussian();
      n = norm2(theta);
    }
    for (double& v : theta) v *= norm / n;
    // Rounding can push the norm a hair above 1.
    const double realized = norm2(theta);
    if (realized > 1.0) {
      for (double& v : theta) v /= realized;
    }
  }
  return BanditInstance(std::move(theta), sigma, sparsity, seed);
}

}  // namespace pls

#endif  // PLS_MODEL_HPP_
