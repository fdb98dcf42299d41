// Copyright 2026 The wmark Authors. All Rights Reserved.
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
#pragma once

#include <cstdint>
#include <random>

namespace wmark {

// Seeded std::mt19937_64 with distribution code written out here so the
// stream depends only on the engine, not on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n >= 1. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);
  bool bit() { return (engine_() >> 63) != 0; }
  // Standard normal via Box-Muller (one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

// Stable 64-bit mix (SplitMix64 finaliser) for deriving per-item seeds.
std::uint64_t mix64(std::uint64_t x);
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return seed ^ mix64(index + 0x9E3779B97F4A7C15ULL);
}

}  // namespace wmark
