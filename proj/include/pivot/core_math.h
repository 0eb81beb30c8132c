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

#ifndef PIVOT_CORE_MATH_H_
#define PIVOT_CORE_MATH_H_

#include <numbers>

#include <Eigen/Core>

namespace pivot {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

// Rotation matrix, row-major semantics (r(i, j) is row i, column j).
using RotMat = Eigen::Matrix3d;

// Quaternion with component order (w, x, y, z).
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double Norm() const;
  Quat Normalized() const;
  Quat operator*(const Quat& o) const;
  Quat operator-() const { return {-w, -x, -y, -z}; }

  static Quat FromAxisAngle(const Eigen::Vector3d& axis, double angle);
  // Rotation about the world Y axis.
  static Quat Pitch(double angle);
};

// Throws InvalidInput when |q| deviates from 1 by more than 1e-6.
RotMat QuatToRotMat(const Quat& q);

// Inverse of QuatToRotMat with w >= 0.
Quat RotMatToQuat(const RotMat& r);

RotMat PitchMatrix(double angle);

// Geodesic angle between two rotations: arccos(0.5 (tr(R_goal R^T) - 1)),
// argument clamped to [-1, 1]. Result in [0, pi].
double RotationDistance(const RotMat& r, const RotMat& r_goal);

// pi/2 minus the rotation distance to the goal.
double Reward(const RotMat& r, const RotMat& r_goal);

// Wraps an angle into (-pi, pi].
double WrapAngle(double a);

}  // namespace pivot

#endif  // PIVOT_CORE_MATH_H_
