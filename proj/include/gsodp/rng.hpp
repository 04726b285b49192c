// Copyright 2025 The gsodp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GSODP_RNG_HPP_
#define GSODP_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace gsodp {

// All randomness in the library flows through this generator. The engine is
// std::mt19937_64, whose output sequence is pinned by the C++ standard, and
// the uniform/normal transforms are implemented here rather than taken from
// <random>, whose distributions are implementation-defined. Substreams are
// derived by hashing (seed, stream index) so that worker partitioning cannot
// change the sample sequence. The identifier below is recorded in run
// metadata.
inline constexpr const char* kPrngId = "mt19937_64+box-muller/v1";

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives the seed of substream `stream` of a base seed.
inline std::uint64_t DeriveSeed(std::uint64_t base_seed, std::uint64_t stream) {
  return SplitMix64(SplitMix64(base_seed) ^ SplitMix64(stream + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t base_seed, std::uint64_t stream)
      : engine_(DeriveSeed(base_seed, stream)) {}

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log() argument.
  double UniformPositive() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via the Box-Muller transform; the second variate of
  // each pair is cached.
  double Normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = UniformPositive();
    const double u2 = Uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t NextRaw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace gsodp

#endif  // GSODP_RNG_HPP_
