// Copyright 2026 The poolsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace poolsim {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed (splitmix64 finalizer).
uint64_t MixSeed(uint64_t seed, uint64_t stream);

inline Rng MakeRng(uint64_t seed, uint64_t stream) {
  return Rng(MixSeed(seed, stream));
}

/// Uniform double in [0, 1). Used instead of std::uniform_real_distribution
/// where the exact bit pattern must not depend on the standard library.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal draw via Box-Muller on UniformUnit.
double StandardNormal(Rng& rng);

/// Standard normal CDF and its inverse.
double NormalCdf(double x);
double NormalQuantile(double p);

/// Rounds to six decimal places, the precision used by every fractional
/// field in trace files.
double RoundMicro(double x);

}  // namespace poolsim
