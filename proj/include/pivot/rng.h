// Copyright 2026 The pivot-adapt Authors
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

#ifndef PIVOT_RNG_H_
#define PIVOT_RNG_H_

#include <cstdint>

namespace pivot {

// Counter-based generator: draw k is SplitMix64's finalizer applied to
// seed + k * golden_gamma, so the stream depends only on (seed, counter)
// and is identical on every platform. Normal variates use Box-Muller with
// our own uniforms, never <random> distributions (their algorithms are
// implementation defined).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 random bits.
  double NextDouble();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t NextBelow(std::uint64_t n);
  double NextGaussian();

  // Independent child stream; does not advance this generator.
  SeededRng Split(std::uint64_t stream_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t Mix64(std::uint64_t z);

// Throws InvalidInput when std < 0. std == 0 returns mean exactly.
double SampleGaussian(SeededRng& rng, double mean, double std);
// Throws InvalidInput when lo > hi.
double SampleUniform(SeededRng& rng, double lo, double hi);

}  // namespace pivot

#endif  // PIVOT_RNG_H_
