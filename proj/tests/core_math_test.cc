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

#include "pivot/core_math.h"

#include <cmath>
#include <vector>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "pivot/errors.h"
#include "pivot/rng.h"

namespace pivot {
namespace {

// Rodrigues' formula, independent of the quaternion path.
RotMat AxisAngleOracle(Eigen::Vector3d axis, double angle) {
  axis.normalize();
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k +
         (1 - std::cos(angle)) * k * k;
}

Quat RandomQuat(SeededRng& rng) {
  Quat q{rng.NextGaussian(), rng.NextGaussian(), rng.NextGaussian(),
         rng.NextGaussian()};
  return q.Normalized();
}

TEST(QuatToRotMat, IdentityQuaternionGivesIdentity) {
  EXPECT_EQ(QuatToRotMat(Quat{}), RotMat::Identity());
}

TEST(QuatToRotMat, PitchHalfPiMatchesAxisAngleOracle) {
  const Quat q{std::cos(kPi / 4), 0, std::sin(kPi / 4), 0};
  const RotMat r = QuatToRotMat(q);
  EXPECT_NEAR(r(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(r(0, 2), 1.0, 1e-12);
  EXPECT_NEAR(r(2, 0), -1.0, 1e-12);
  EXPECT_LT((r - AxisAngleOracle({0, 1, 0}, kHalfPi)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((PitchMatrix(kHalfPi) - r).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(QuatToRotMat, DoubleCoverGivesSameMatrix) {
  SeededRng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Quat q = RandomQuat(rng);
    EXPECT_EQ(QuatToRotMat(q), QuatToRotMat(-q));
  }
}

TEST(QuatToRotMat, RejectsNonUnit) {
  EXPECT_THROW(QuatToRotMat(Quat{1.0, 0.01, 0, 0}), InvalidInput);
  EXPECT_NO_THROW(QuatToRotMat(Quat{1.0 + 5e-7, 0, 0, 0}));
}

TEST(QuatToRotMat, IsHomomorphismAndOrthonormal) {
  SeededRng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Quat a = RandomQuat(rng), b = RandomQuat(rng);
    const RotMat ab = QuatToRotMat((a * b).Normalized());
    EXPECT_LT((ab - QuatToRotMat(a) * QuatToRotMat(b)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((ab.transpose() * ab - RotMat::Identity()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(ab.determinant(), 1.0, 1e-8);
  }
}

TEST(QuatToRotMat, RoundTripsThroughMatrixToQuaternion) {
  SeededRng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const RotMat r = QuatToRotMat(RandomQuat(rng));
    EXPECT_LT(RotationDistance(QuatToRotMat(RotMatToQuat(r)), r), 1e-7);
    // arccos near 1 loses half the digits; compare matrices for the tight bound.
    EXPECT_LT((QuatToRotMat(RotMatToQuat(r)) - r).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(RotationDistance, Examples) {
  EXPECT_EQ(RotationDistance(PitchMatrix(0.4), PitchMatrix(0.4)), 0.0);
  EXPECT_NEAR(RotationDistance(PitchMatrix(kHalfPi), RotMat::Identity()), kHalfPi,
              1e-12);
  // Oracle: composing the two axis-angle rotations leaves a 0.8 rad rotation.
  const RotMat rel = AxisAngleOracle({0, 1, 0}, 1.1) *
                     AxisAngleOracle({0, 1, 0}, 0.3).transpose();
  const double oracle = std::atan2(
      0.5 * std::sqrt(std::pow(rel(2, 1) - rel(1, 2), 2) +
                      std::pow(rel(0, 2) - rel(2, 0), 2) +
                      std::pow(rel(1, 0) - rel(0, 1), 2)),
      0.5 * (rel.trace() - 1));
  EXPECT_NEAR(oracle, 0.8, 1e-12);
  EXPECT_NEAR(RotationDistance(PitchMatrix(0.3), PitchMatrix(1.1)), oracle, 1e-9);
}

TEST(RotationDistance, ClampsDriftedInputs) {
  RotMat r = RotMat::Identity() * (1.0 + 1e-12);
  const double d = RotationDistance(r, RotMat::Identity());
  EXPECT_FALSE(std::isnan(d));
  EXPECT_EQ(d, 0.0);
}

TEST(RotationDistance, SymmetricOnRandomPairs) {
  SeededRng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const RotMat a = QuatToRotMat(RandomQuat(rng)), b = QuatToRotMat(RandomQuat(rng));
    const double d = RotationDistance(a, b);
    EXPECT_NEAR(d, RotationDistance(b, a), 1e-9);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, kPi);
  }
}

TEST(RotationDistance, SingleAxisEqualsAngleDifference) {
  SeededRng rng(8);
  const Eigen::Vector3d axis = Eigen::Vector3d(0.3, -1.0, 0.5).normalized();
  for (int i = 0; i < 1000; ++i) {
    const double a = SampleUniform(rng, 0, kPi), b = SampleUniform(rng, 0, kPi);
    const double d = RotationDistance(QuatToRotMat(Quat::FromAxisAngle(axis, a)),
                                      QuatToRotMat(Quat::FromAxisAngle(axis, b)));
    EXPECT_NEAR(d, std::abs(a - b), 1e-9);
  }
}

TEST(Reward, Examples) {
  const RotMat goal = PitchMatrix(kHalfPi);
  EXPECT_EQ(Reward(goal, goal), kHalfPi);
  EXPECT_NEAR(Reward(RotMat::Identity(), goal), 0.0, 1e-12);
  EXPECT_NEAR(Reward(PitchMatrix(kPi / 4), goal), kPi / 4, 1e-9);
}

TEST(Reward, BoundedAndMonotoneInDistance) {
  const RotMat goal = PitchMatrix(kHalfPi);
  double prev = Reward(goal, goal);
  for (int i = 1; i <= 180; ++i) {
    const double r = Reward(PitchMatrix(kHalfPi - i * kPi / 180), goal);
    EXPECT_LT(r, prev);
    EXPECT_GE(r, kHalfPi - kPi - 1e-12);
    prev = r;
  }
}

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
  EXPECT_NEAR(WrapAngle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(WrapAngle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(WrapAngle(0.5), 0.5, 1e-15);
  EXPECT_NEAR(WrapAngle(-7.0), -7.0 + 2 * kPi, 1e-12);
}

TEST(Sampling, ZeroStdReturnsMean) {
  SeededRng rng(1);
  EXPECT_EQ(SampleGaussian(rng, 0.123, 0.0), 0.123);
}

TEST(Sampling, RejectsBadParameters) {
  SeededRng rng(1);
  EXPECT_THROW(SampleGaussian(rng, 0, -1e-3), InvalidInput);
  EXPECT_THROW(SampleUniform(rng, 1.0, 0.0), InvalidInput);
}

TEST(Sampling, GaussianStdMatches) {
  SeededRng rng(42);
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = SampleGaussian(rng, 0.0, 0.02);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  EXPECT_NEAR(sd, 0.02, 0.05 * 0.02);
  EXPECT_NEAR(mean, 0.0, 4 * 0.02 / std::sqrt(n));
}

TEST(Sampling, UniformMeanMatches) {
  SeededRng rng(43);
  const int n = 100000;
  double s = 0;
  for (int i = 0; i < n; ++i) {
    const double x = SampleUniform(rng, 0.0, 0.05);
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 0.05);
    s += x;
  }
  EXPECT_NEAR(s / n, 0.025, 0.01 * 0.025);
}

TEST(SeededRng, StreamsAreReproducible) {
  SeededRng a(99), b(99);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.NextU64(), b.NextU64());
  SeededRng c(99);
  EXPECT_NE(c.Split(1).NextU64(), c.Split(2).NextU64());
  EXPECT_EQ(c.counter(), 0u);
  // Frozen first draw pins the generator across platforms and refactors.
  EXPECT_EQ(SeededRng(0).NextU64(), 0xE220A8397B1DCDAFULL);
}

TEST(SeededRng, NextBelowStaysInRange) {
  SeededRng rng(7);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.NextBelow(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

}  // namespace
}  // namespace pivot
