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

#include <algorithm>
#include <cmath>
#include <string>

#include "pivot/errors.h"

namespace pivot {

double Quat::Norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quat Quat::Normalized() const {
  const double n = Norm();
  if (n == 0.0) throw InvalidInput("cannot normalize a zero quaternion");
  return {w / n, x / n, y / n, z / n};
}

Quat Quat::operator*(const Quat& o) const {
  return {w * o.w - x * o.x - y * o.y - z * o.z,
          w * o.x + x * o.w + y * o.z - z * o.y,
          w * o.y - x * o.z + y * o.w + z * o.x,
          w * o.z + x * o.y - y * o.x + z * o.w};
}

Quat Quat::FromAxisAngle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) throw InvalidInput("rotation axis must be nonzero");
  const Eigen::Vector3d u = axis / n;
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), s * u.x(), s * u.y(), s * u.z()};
}

Quat Quat::Pitch(double angle) {
  return {std::cos(0.5 * angle), 0.0, std::sin(0.5 * angle), 0.0};
}

RotMat QuatToRotMat(const Quat& q) {
  const double n = q.Norm();
  if (std::abs(n - 1.0) > 1e-6) {
    throw InvalidInput("quaternion is not unit norm (|q| = " + std::to_string(n) +
                       ")");
  }
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  RotMat r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Quat RotMatToQuat(const RotMat& r) {
  // Shepperd: pick the largest of the four diagonal combinations.
  const double tr = r.trace();
  Quat q;
  if (tr > r(0, 0) && tr > r(1, 1) && tr > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
         (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
         (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
         (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s,
         (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  if (q.w < 0) q = -q;
  return q.Normalized();
}

RotMat PitchMatrix(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  RotMat r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

double RotationDistance(const RotMat& r, const RotMat& r_goal) {
  const double arg = 0.5 * ((r_goal * r.transpose()).trace() - 1.0);
  return std::acos(std::clamp(arg, -1.0, 1.0));
}

double Reward(const RotMat& r, const RotMat& r_goal) {
  return kHalfPi - RotationDistance(r, r_goal);
}

double WrapAngle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0) a += 2.0 * kPi;
  return a - kPi;
}

}  // namespace pivot
