// Copyright 2026 The tempalign Authors.
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

// Portable random helpers. Every stochastic step draws from std::mt19937_64
// through these functions so results do not depend on the standard library's
// distribution implementations.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tempalign {

// Uniform double in [0, 1) from 53 random bits.
template <typename Rng>
double unit_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection, n > 0.
template <typename Rng>
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Box-Muller; uses two uniforms per call.
template <typename Rng>
double standard_normal(Rng& rng) {
  double u1 = unit_double(rng);
  const double u2 = unit_double(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Poisson variate: inversion for small means, normal approximation with
// continuity correction above 1e4 (error far below sampling noise there).
template <typename Rng>
std::uint64_t poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 1e4) {
    const double x = std::round(mean + std::sqrt(mean) * standard_normal(rng));
    return x < 0.0 ? 0 : static_cast<std::uint64_t>(x);
  }
  // Split large means into steps of 500 so exp(-mean) does not underflow.
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double step = std::min(mean, 500.0);
    mean -= step;
    const double limit = std::exp(-step);
    double p = 1.0;
    std::uint64_t k = 0;
    while (true) {
      p *= unit_double(rng);
      if (p <= limit) break;
      ++k;
    }
    total += k;
  }
  return total;
}

// SplitMix64 finaliser, used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(seed) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

}  // namespace tempalign
