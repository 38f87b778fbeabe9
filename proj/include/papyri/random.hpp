// Copyright 2026 The papyri Authors. All Rights Reserved.
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

// Reproducible random streams.
//
// Engine: std::mt19937_64 (its output sequence is fixed by the C++
// standard). Stream seeds come from SplitMix64:
//
//   derive_seed(seed, stream) = splitmix64(seed ^ splitmix64(stream + 1))
//
// where splitmix64(x) is one SplitMix64 output for state x, i.e. the
// finalizer applied to x + 0x9E3779B97F4A7C15. Distributions are written out
// here instead of using <random>'s, whose algorithms are unspecified:
//
//   uniform()  = (next() >> 11) * 2^-53                    in [0, 1)
//   normal()   = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)        two uniforms per call
//   poisson(l) = Knuth's product-of-uniforms method
//   index(n)   = floor(uniform() * n)

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace papyri {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal(double mean = 0.0, double sd = 1.0) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sd * z;
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t index(std::uint64_t n) {
    const auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Rates are capped by callers (see NoiseSpec::validate) so exp(-rate)
  // stays well away from underflow.
  std::uint64_t poisson(double rate) {
    if (rate <= 0.0) return 0;
    const double limit = std::exp(-rate);
    std::uint64_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace papyri
