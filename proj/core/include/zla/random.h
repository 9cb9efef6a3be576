// Copyright 2026 The zla Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZLA_RANDOM_H_
#define ZLA_RANDOM_H_

#include <cstdint>
#include <random>

namespace zla {

// Seeded 64-bit Mersenne Twister with distribution helpers that depend only
// on the raw engine output, so draw sequences are identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). Unbiased (rejection sampling).
  std::uint64_t UniformInt(std::uint64_t n);

  // Independent child stream; the parent state is not advanced.
  static Rng Stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t NextRaw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer, used to derive well-mixed child seeds.
std::uint64_t MixSeed(std::uint64_t x);

}  // namespace zla

#endif  // ZLA_RANDOM_H_
