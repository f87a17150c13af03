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

// Clipping plus the stochastic (uplink) and deterministic (downlink) grid
// quantizers. Grids are symmetric with an even number of intervals so that
// zero is a grid point and indices are signed integers centred at zero.

#ifndef PLS_QUANT_HPP_
#define PLS_QUANT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pls/common.hpp"
#include "pls/rng.hpp"

namespace pls {

inline constexpr double kQuantNormSlack = 1e-9;

class QuantGrid {
 public:
  QuantGrid(double radius, double resolution) : radius_(radius), resolution_(resolution) {
    require(radius_ > 0.0 && std::isfinite(radius_), "QuantGrid: radius must be positive");
    require(resolution_ > 0.0 && std::isfinite(resolution_), "QuantGrid: resolution must be positive");
    const double half = std::ceil(radius_ / resolution_);
    require(half <= 1e15, "QuantGrid: radius/resolution too large");
    levels_ = 2 * static_cast<std::int64_t>(half);
  }

  double radius() const { return radius_; }
  double resolution() const { return resolution_; }
  /// Number of intervals l_eps (always even).
  std::int64_t levels() const { return levels_; }
  std::int64_t max_index() const { return levels_ / 2; }
  double spacing() const { return 2.0 * radius_ / static_cast<double>(levels_); }

  /// Grid point b_m = r (2m / l - 1), m = 0..l. Exactly symmetric, b_{l/2} = 0.
  double point(std::int64_t m) const {
    return radius_ * static_cast<double>(2 * m - levels_) / static_cast<double>(levels_);
  }
  /// Value of a signed index q in [-l/2, l/2].
  double value(std::int64_t q) const { return point(q + levels_ / 2); }

  bool operator==(const QuantGrid&) const = default;

 private:
  double radius_;
  double resolution_;
  std::int64_t levels_;
};

struct QuantizedVector {
  std::vector<std::int64_t> indices;
  QuantGrid grid;

  std::size_t size() const { return indices.size(); }
  Vec values() const {
    Vec out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) out[i] = grid.value(indices[i]);
    return out;
  }
};

enum class QuantMode { kStochastic, kDeterministic };

/// x * min{1, r / ||x||}.
inline Vec clip(std::span<const double> x, double r) {
  require(r > 0.0, "clip: radius must be positive");
  const double n = norm2(x);
  Vec out(x.begin(), x.end());
  if (n > r) {
    const double factor = r / n;
    for (double& v : out) v *= factor;
  }
  return out;
}

namespace detail {

// Lower end m of the interval [b_m, b_{m+1}) holding y; y = r lands in the
// top interval.
inline std::int64_t interval_floor(double y, const QuantGrid& grid) {
  const std::int64_t l = grid.levels();
  auto m = static_cast<std::int64_t>(std::floor((y + grid.radius()) / grid.spacing()));
  m = std::clamp<std::int64_t>(m, 0, l - 1);
  while (m > 0 && y < grid.point(m)) --m;
  while (m < l - 1 && y >= grid.point(m + 1)) ++m;
  return m;
}

inline void check_scalar_domain(double y, const QuantGrid& grid) {
  require(std::abs(y) <= grid.radius(), "quantizer input lies outside [-r, r]");
}

}  // namespace detail

/// Unbiased stochastic rounding to the neighbouring grid points. Always
/// consumes exactly one uniform draw from `stream`.
inline std::int64_t sto_quant_scalar(double y, const QuantGrid& grid, RandomStream& stream) {
  detail::check_scalar_domain(y, grid);
  const double u = stream.uniform();
  const std::int64_t m = detail::interval_floor(y, grid);
  const double lo = grid.point(m);
  const double hi = grid.point(m + 1);
  const double p_upper = (y - lo) / (hi - lo);
  return (u < p_upper ? m + 1 : m) - grid.max_index();
}

/// Nearest grid point; an exact midpoint goes to the upper point.
inline std::int64_t det_quant_scalar(double y, const QuantGrid& grid) {
  detail::check_scalar_domain(y, grid);
  const std::int64_t m = detail::interval_floor(y, grid);
  const double lo = grid.point(m);
  const double hi = grid.point(m + 1);
  const std::int64_t chosen = std::abs(hi - y) > std::abs(lo - y) ? m : m + 1;
  return chosen - grid.max_index();
}

/// Grid used for a p-dimensional vector at vector resolution eps_prime: each
/// coordinate gets resolution eps_prime / sqrt(p).
inline QuantGrid vector_grid(std::size_t p, double eps_prime, double r) {
  require(p >= 1, "vector_grid: dimension must be >= 1");
  return QuantGrid(r, eps_prime / std::sqrt(static_cast<double>(p)));
}

inline QuantizedVector quant_vector(std::span<const double> x, double eps_prime, double r, QuantMode mode,
                                    RandomStream* stream) {
  require(!x.empty(), "quant_vector: empty input");
  require(norm2(x) <= r + kQuantNormSlack, "quant_vector: ||x|| exceeds the clip radius");
  require(mode == QuantMode::kDeterministic || stream != nullptr,
          "quant_vector: stochastic mode needs a random stream");
  QuantizedVector out{std::vector<std::int64_t>(x.size()), vector_grid(x.size(), eps_prime, r)};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = std::clamp(x[i], -r, r);
    out.indices[i] = mode == QuantMode::kStochastic ? sto_quant_scalar(y, out.grid, *stream)
                                                    : det_quant_scalar(y, out.grid);
  }
  return out;
}

inline QuantizedVector sto_quant(std::span<const double> x, double eps_prime, double r, RandomStream& stream) {
  return quant_vector(x, eps_prime, r, QuantMode::kStochastic, &stream);
}

inline QuantizedVector det_quant(std::span<const double> x, double eps_prime, double r) {
  return quant_vector(x, eps_prime, r, QuantMode::kDeterministic, nullptr);
}

}  // namespace pls

#endif  // PLS_QUANT_HPP_
