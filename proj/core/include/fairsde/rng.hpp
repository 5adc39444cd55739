// Copyright 2026 The fairsde Authors
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

#ifndef FAIRSDE_RNG_HPP_
#define FAIRSDE_RNG_HPP_

#include <cstdint>
#include <span>
#include <string_view>

namespace fairsde {

// xoshiro256** seeded through SplitMix64. Every draw (uniform reals, bounded
// integers, Gaussians) is derived with integer arithmetic or a fixed
// Box-Muller transform so that a seed reproduces the same stream everywhere,
// independent of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 bits of precision.
  double uniform();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  double normal();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

// Named sub-seed: lets each randomness source (data, init, shuffle, pairs,
// probe) be perturbed independently of the others.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace fairsde

#endif  // FAIRSDE_RNG_HPP_
