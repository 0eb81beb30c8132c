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

#include "pivot/rng.h"

#include <cmath>

#include "pivot/core_math.h"
#include "pivot/errors.h"

namespace pivot {
namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
}  // namespace

std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SeededRng::NextU64() {
  ++counter_;
  return Mix64(seed_ + counter_ * kGoldenGamma);
}

double SeededRng::NextDouble() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::NextBelow(std::uint64_t n) {
  if (n == 0) throw InvalidInput("NextBelow: n must be positive");
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = NextU64();
  } while (v >= limit);
  return v % n;
}

double SeededRng::NextGaussian() {
  const double u1 = 1.0 - NextDouble();  // (0, 1]
  const double u2 = NextDouble();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

SeededRng SeededRng::Split(std::uint64_t stream_id) const {
  return SeededRng(Mix64(seed_ ^ Mix64(stream_id + kGoldenGamma)));
}

double SampleGaussian(SeededRng& rng, double mean, double std) {
  if (!(std >= 0.0)) throw InvalidInput("SampleGaussian: std must be >= 0");
  if (std == 0.0) return mean;
  return mean + std * rng.NextGaussian();
}

double SampleUniform(SeededRng& rng, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidInput("SampleUniform: lo must be <= hi");
  return lo + (hi - lo) * rng.NextDouble();
}

}  // namespace pivot
