/* Copyright 2026 The Gicx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef GICX_NUMERICS_RANDOM_H_
#define GICX_NUMERICS_RANDOM_H_

#include <cstdint>
#include <random>

namespace gicx {

// Seeded generator with platform-independent output. std::mt19937_64 is
// fully specified by the standard; the distributions in <random> are not,
// so uniform and normal draws are derived here from raw 64-bit words.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], rejection sampled.
  int64_t UniformInt(int64_t lo, int64_t hi);

  // Standard normal via Box-Muller; the second variate is cached.
  double Normal();

  bool Bernoulli(double p) { return Uniform() < p; }

  // Derives an independent child seed, e.g. one per image in a batch job.
  uint64_t Fork() { return engine_() ^ 0x9e3779b97f4a7c15ULL; }

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace gicx

#endif  // GICX_NUMERICS_RANDOM_H_
