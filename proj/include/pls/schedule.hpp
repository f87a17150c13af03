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

// Policy parameters of PLS and Sparse-PLS. Every epoch-dependent quantity the
// protocol uses comes from here. Logarithms are natural.

#ifndef PLS_SCHEDULE_HPP_
#define PLS_SCHEDULE_HPP_

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pls/common.hpp"

namespace pls {

struct SparseSettings {
  std::size_t s = 1;  // sparsity level
  std::size_t m = 1;  // number of sensing actions
};

struct PolicyConfig {
  std::size_t d = 1;
  std::size_t M = 1;
  std::int64_t T = 1;
  double sigma = 0.5;
  double delta = 0.05;
  double alpha0 = 0.5;
  double beta0 = 0.5;
  std::optional<SparseSettings> sparse;

  void validate() const {
    require(d >= 1, "PolicyConfig.d must be >= 1");
    require(M >= 1, "PolicyConfig.M must be >= 1");
    require(T >= 1, "PolicyConfig.T must be >= 1");
    require(sigma > 0.0 && std::isfinite(sigma), "PolicyConfig.sigma must be positive");
    require(delta > 0.0 && delta < 1.0, "PolicyConfig.delta must lie in (0, 1)");
    require(alpha0 > 0.0 && alpha0 < 1.0, "PolicyConfig.alpha0 must lie in (0, 1)");
    require(beta0 > 0.0 && beta0 < 1.0, "PolicyConfig.beta0 must lie in (0, 1)");
    if (sparse) {
      require(sparse->s >= 1 && sparse->s <= d, "PolicyConfig.sparse.s must lie in [1, d]");
      require(sparse->m >= 1, "PolicyConfig.sparse.m must be >= 1");
    }
  }
};

struct EpochParams {
  int k = 0;
  std::int64_t s = 0;  // exploration repetitions per action
  double tau = 0.0;    // server error envelope
  double R = 0.0;      // uplink clip component
  double B = 0.0;      // bound on ||theta_bar_{k-1} - theta*||
  double alpha = 0.0;  // uplink vector resolution
  double beta = 0.0;   // downlink vector resolution
  double lambda = 0.0; // LASSO weight (sparse only)

  double uplink_radius() const { return R + B; }
  double downlink_radius() const { return B + tau; }
};

namespace detail {

inline double max_epoch_lhs(const PolicyConfig& cfg, int k) {
  const double base = 40.0 * cfg.sigma * cfg.sigma * static_cast<double>(cfg.d) *
                      std::log(8.0 * static_cast<double>(cfg.M) * k / cfg.delta);
  return base * (std::pow(4.0, k) - 4.0);
}

inline constexpr int kEpochScanLimit = 200;

}  // namespace detail

/// K = max{k : 40 sigma^2 d log(8 M k / delta) (4^k - 4) <= T}, at least 1.
inline int max_epochs(const PolicyConfig& cfg) {
  cfg.validate();
  int k = 1;
  while (k < detail::kEpochScanLimit && detail::max_epoch_lhs(cfg, k + 1) <= static_cast<double>(cfg.T)) ++k;
  return k;
}

namespace detail {

inline void check_epoch(int k, int K) {
  require(k >= 1 && k <= K, "epoch index " + std::to_string(k) + " outside [1, " + std::to_string(K) + "]");
}

inline std::int64_t ceil_to_count(double x) {
  const double c = std::ceil(x);
  if (c >= 4e18) return std::numeric_limits<std::int64_t>::max() / 2;
  return static_cast<std::int64_t>(c);
}

inline std::int64_t exploration_length(const PolicyConfig& cfg, int K, int k) {
  const double factor = cfg.sparse ? 16.0 : 8.0;
  const double x = 40.0 * cfg.sigma * cfg.sigma * static_cast<double>(cfg.d) *
                   std::log(factor * static_cast<double>(cfg.M) * K / cfg.delta) * std::pow(4.0, k);
  return ceil_to_count(x);
}

}  // namespace detail

/// s_k = ceil(40 sigma^2 d log(8 M K / delta) 4^k); 16 replaces 8 in sparse mode.
inline std::int64_t exploration_length(const PolicyConfig& cfg, int k) {
  const int K = max_epochs(cfg);
  detail::check_epoch(k, K);
  return detail::exploration_length(cfg, K, k);
}

inline double lasso_lambda_value(double sigma, std::size_t m, std::int64_t s_k, std::size_t d, double delta) {
  require(sigma >= 0.0 && m >= 1 && s_k >= 1 && d >= 1 && delta > 0.0 && delta < 1.0,
          "lasso_lambda_value: invalid arguments");
  return 4.0 * sigma * std::sqrt(3.0 / (2.0 * static_cast<double>(m) * static_cast<double>(s_k))) *
         (std::sqrt(std::log(2.0 * static_cast<double>(d))) + std::sqrt(std::log(4.0 / delta)));
}

namespace detail {

inline EpochParams resolutions(const PolicyConfig& cfg, int K, int k) {
  EpochParams p;
  p.k = k;
  p.s = exploration_length(cfg, K, k);
  const double sqrt_m_agents = std::sqrt(static_cast<double>(cfg.M));
  p.tau = 3.0 * std::pow(2.0, -(k + 1)) / sqrt_m_agents;
  p.beta = cfg.beta0 * p.tau;
  const double s_k = static_cast<double>(p.s);
  if (cfg.sparse) {
    const double shrink = std::sqrt(static_cast<double>(cfg.sparse->m) / static_cast<double>(cfg.d));
    p.R = std::pow(2.0, -k) * shrink;
    p.B = 7.0 * p.tau * shrink;
    p.alpha = cfg.alpha0 * cfg.sigma * std::sqrt(static_cast<double>(cfg.sparse->s) / s_k);
    p.lambda = lasso_lambda_value(cfg.sigma, cfg.sparse->m, p.s, cfg.d, cfg.delta);
  } else {
    p.R = std::pow(2.0, -k);
    p.B = k == 1 ? 1.0 : 5.0 * p.tau;
    p.alpha = cfg.alpha0 * cfg.sigma * std::sqrt(static_cast<double>(cfg.d)) / std::sqrt(s_k);
  }
  return p;
}

}  // namespace detail

inline EpochParams resolutions(const PolicyConfig& cfg, int k) {
  const int K = max_epochs(cfg);
  detail::check_epoch(k, K);
  return detail::resolutions(cfg, K, k);
}

/// t_k = ceil(M s_k^2 mu0^2); sparse mode uses ceil(m M s_k^2 / d) and
/// ignores mu0.
inline std::int64_t exploitation_length(const PolicyConfig& cfg, int k, double mu0) {
  require(mu0 >= 0.0, "exploitation_length: mu0 must be nonnegative");
  const double s_k = static_cast<double>(exploration_length(cfg, k));
  const double M = static_cast<double>(cfg.M);
  if (cfg.sparse) {
    return detail::ceil_to_count(static_cast<double>(cfg.sparse->m) * M * s_k * s_k / static_cast<double>(cfg.d));
  }
  return detail::ceil_to_count(M * s_k * s_k * mu0 * mu0);
}

inline double lasso_lambda(const PolicyConfig& cfg, int k) {
  require(cfg.sparse.has_value(), "lasso_lambda: only defined in sparse mode");
  return resolutions(cfg, k).lambda;
}

struct DesignSize {
  std::size_t m = 0;          // row count actually used (capped at d)
  std::int64_t formula = 0;   // uncapped formula value
  bool capped = false;
};

/// m = ceil(c (s log(150 d / s) + log(4 / delta))), c = 80 by default,
/// capped at d.
inline DesignSize sparse_design_size(std::size_t d, std::size_t s, double delta, double constant = 80.0) {
  require(s >= 1 && s <= d, "sparse_design_size: s must lie in [1, d]");
  require(delta > 0.0 && delta < 1.0, "sparse_design_size: delta must lie in (0, 1)");
  require(constant > 0.0, "sparse_design_size: constant must be positive");
  const double sd = static_cast<double>(s);
  const double value = constant * (sd * std::log(150.0 * static_cast<double>(d) / sd) + std::log(4.0 / delta));
  DesignSize out;
  out.formula = detail::ceil_to_count(value);
  out.capped = out.formula > static_cast<std::int64_t>(d);
  out.m = out.capped ? d : static_cast<std::size_t>(out.formula);
  return out;
}

/// Cached per-epoch parameters for one configuration.
class EpochSchedule {
 public:
  explicit EpochSchedule(PolicyConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    K_ = max_epochs(cfg_);
    epochs_.reserve(static_cast<std::size_t>(K_));
    for (int k = 1; k <= K_; ++k) epochs_.push_back(detail::resolutions(cfg_, K_, k));
  }

  const PolicyConfig& config() const { return cfg_; }
  int K() const { return K_; }
  const EpochParams& at(int k) const {
    detail::check_epoch(k, K_);
    return epochs_[static_cast<std::size_t>(k - 1)];
  }
  /// Number of exploration actions per epoch: d, or m in sparse mode.
  std::size_t actions_per_round() const { return cfg_.sparse ? cfg_.sparse->m : cfg_.d; }

  std::int64_t exploitation_length(int k, double mu0) const {
    const double s_k = static_cast<double>(at(k).s);
    const double M = static_cast<double>(cfg_.M);
    if (cfg_.sparse) {
      return detail::ceil_to_count(static_cast<double>(cfg_.sparse->m) * M * s_k * s_k /
                                   static_cast<double>(cfg_.d));
    }
    return detail::ceil_to_count(M * s_k * s_k * mu0 * mu0);
  }

  /// Tab-separated parameter table for run provenance.
  std::string dump() const {
    std::ostringstream os;
    os << "# d=" << cfg_.d << " M=" << cfg_.M << " T=" << cfg_.T << " sigma=" << cfg_.sigma
       << " delta=" << cfg_.delta << " alpha0=" << cfg_.alpha0 << " beta0=" << cfg_.beta0;
    if (cfg_.sparse) os << " s=" << cfg_.sparse->s << " m=" << cfg_.sparse->m;
    os << " K=" << K_ << "\n";
    os << "k\ts_k\t" << (cfg_.sparse ? "t_k" : "t_k/mu0^2") << "\ttau_k\tR_k\tB_k\talpha_k\tbeta_k\tlambda_k\n";
    os << std::setprecision(10);
    for (const auto& p : epochs_) {
      const double s_k = static_cast<double>(p.s);
      const double t_rule = cfg_.sparse ? static_cast<double>(exploitation_length(p.k, 0.0))
                                        : static_cast<double>(cfg_.M) * s_k * s_k;
      os << p.k << '\t' << p.s << '\t' << t_rule << '\t' << p.tau << '\t' << p.R << '\t' << p.B << '\t'
         << p.alpha << '\t' << p.beta << '\t' << p.lambda << '\n';
    }
    return os.str();
  }

 private:
  PolicyConfig cfg_;
  int K_ = 1;
  std::vector<EpochParams> epochs_;
};

}  // namespace pls

#endif  // PLS_SCHEDULE_HPP_
