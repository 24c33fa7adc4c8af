// Copyright 2026 The dtf Authors
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

#ifndef DTF_RNG_HPP_
#define DTF_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace dtf
{

// Named sub-streams for seed derivation so independent consumers of
// randomness (init, shuffling, noise, data, evaluation) never collide.
enum class SeedStream : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kNoise = 3,
  kData = 4,
  kEval = 5,
};

/// Deterministic random source. mt19937_64 output is pinned by the
/// standard and the uniform/normal transforms below are explicit, so
/// identical seeds give bit-identical streams on every platform
/// (std::uniform_real_distribution and friends do not guarantee that).
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform()
  {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; caches the paired draw.
  double normal();

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t next_below(std::uint64_t bound);

  Eigen::VectorXd normal_vector(int n)
  {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
      v[i] = normal();
    }
    return v;
  }

  /// Stable seed derivation: splitmix64 over (base, stream, index).
  static std::uint64_t derive(
    std::uint64_t base, SeedStream stream, std::uint64_t index = 0);

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Fisher-Yates shuffle driven by Rng::next_below, deterministic
/// everywhere (std::shuffle is implementation-defined).
void shuffle_indices(std::vector<int> & idx, Rng & rng);

}  // namespace dtf

#endif  // DTF_RNG_HPP_
