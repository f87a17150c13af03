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

#ifndef PLS_RNG_HPP_
#define PLS_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pls {

// Stream tags. Each random consumer in a run gets its own stream, keyed by
// (root seed, tag, index...), so adding agents or replications never shifts
// the numbers another consumer sees.
enum class StreamTag : std::uint64_t {
  kReplication = 1,
  kInstance = 2,
  kRewardNoise = 3,
  kQuantizer = 4,
  kSensingDesign = 5,
  kBootstrap = 6,
  kDiagnostic = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a root seed and a path of integers.
inline std::uint64_t derive_seed(std::uint64_t root, StreamTag tag,
                                 std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t h = splitmix64(root ^ 0x5851F42D4C957F2DULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  return h;
}

/// A single random stream. Owned by exactly one consumer.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t root, StreamTag tag, std::initializer_list<std::uint64_t> path = {})
      : engine_(derive_seed(root, tag, path)) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace pls

#endif  // PLS_RNG_HPP_
