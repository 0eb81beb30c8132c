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

#include "pivot/sim.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "pivot/core_math.h"
#include "pivot/errors.h"

namespace pivot {
namespace {

using Row5 = Eigen::Matrix<double, 1, 5>;

Vec2 Rotate(double theta, const Vec2& b) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * b.x() + s * b.y(), -s * b.x() + c * b.y()};
}

// d(point velocity)/d(omega) for a point at offset r from the centroid.
Vec2 AngularLever(const Vec2& r) { return {r.y(), -r.x()}; }

Vec2 Tangent(const Vec2& n) { return {n.y(), -n.x()}; }

Row5 ObjectPointJacobian(const Vec2& dir, const Vec2& r) {
  Row5 j = Row5::Zero();
  j(0) = dir.x();
  j(1) = dir.y();
  j(2) = dir.dot(AngularLever(r));
  return j;
}

Row5 GripperJacobian(const Vec2& dir) {
  Row5 j = Row5::Zero();
  j(3) = dir.x();
  j(4) = dir.y();
  return j;
}

void Require(bool ok, const char* field) {
  if (!ok) throw ConfigError(std::string("sim.") + field + " must be positive");
}

}  // namespace

void ValidateSimConfig(const SimConfig& c) {
  Require(c.dt > 0, "dt");
  Require(c.substeps > 0, "substeps");
  Require(c.gravity > 0, "gravity");
  Require(c.contact_stiffness > 0, "contact_stiffness");
  Require(c.contact_damping_ratio > 0, "contact_damping_ratio");
  Require(c.gripper_radius > 0, "gripper_radius");
  Require(c.gripper_mass > 0, "gripper_mass");
  Require(c.gripper_stiffness > 0, "gripper_stiffness");
  Require(c.gripper_damping_ratio > 0, "gripper_damping_ratio");
  Require(c.force_limit > 0, "force_limit");
  Require(c.max_step_displacement > 0, "max_step_displacement");
  Require(c.max_step_rotation > 0, "max_step_rotation");
}

PlanarSim::PlanarSim(const ObjectSpec& spec, const SimConfig& config)
    : spec_(spec), config_(config) {
  ValidateSimConfig(config_);
  if (spec_.cross_section.size() < 3 || !(spec_.mass > 0) || !(spec_.inertia > 0)) {
    throw InvalidInput("PlanarSim: object spec lacks geometry or mass");
  }
  centroid_ = PolygonCentroid(spec_.cross_section);
  mass_ = spec_.mass;
  inertia_ = spec_.inertia;
  mass_matrix_.setZero();
  mass_matrix_.diagonal() << mass_, mass_, inertia_, config_.gripper_mass,
      config_.gripper_mass;
}

void PlanarSim::SetObjectPose(double origin_x, double origin_z, double theta) {
  const Vec2 c = Vec2(origin_x, origin_z) + Rotate(theta, centroid_);
  object_ = BodyState{c.x(), c.y(), theta, 0.0, 0.0, 0.0};
  anchors_.clear();
}

void PlanarSim::SetGripper(const Vec2& position, double pitch) {
  gripper_pos_ = position;
  gripper_vel_.setZero();
  gripper_pitch_ = pitch;
  wrist_force_.setZero();
  anchors_.clear();
}

Vec2 PlanarSim::BodyToWorld(const Vec2& b) const {
  return Vec2(object_.x, object_.z) + Rotate(object_.theta, b - centroid_);
}

Polygon PlanarSim::WorldPolygon() const {
  Polygon out;
  out.reserve(spec_.cross_section.size());
  for (const Vec2& v : spec_.cross_section) out.push_back(BodyToWorld(v));
  return out;
}

double PlanarSim::ObjectEnergy() const {
  double elastic = 0.0;
  for (const Contact& c : FindContacts()) {
    if (c.record.kind != ContactKind::kObjectTable &&
        c.record.kind != ContactKind::kObjectWall) {
      continue;
    }
    auto it = anchors_.find(c.key);
    const double s = it == anchors_.end() ? 0.0 : it->second;
    elastic += 0.5 * config_.contact_stiffness * (c.record.depth * c.record.depth + s * s);
  }
  return 0.5 * mass_ * (object_.vx * object_.vx + object_.vz * object_.vz) +
         0.5 * inertia_ * object_.omega * object_.omega +
         mass_ * config_.gravity * object_.z + elastic;
}

PlanarSim::Vec5 PlanarSim::Velocity() const {
  Vec5 v;
  v << object_.vx, object_.vz, object_.omega, gripper_vel_.x(), gripper_vel_.y();
  return v;
}

double PlanarSim::EffectiveMass(const Row5& j) const {
  const double inv = (j.array().square() / mass_matrix_.diagonal().transpose().array()).sum();
  return inv > 0 ? 1.0 / inv : 0.0;
}

std::vector<PlanarSim::Contact> PlanarSim::FindContacts() const {
  std::vector<Contact> out;
  const Vec2 oc(object_.x, object_.z);
  const Polygon poly = WorldPolygon();
  const double mu_table = spec_.friction.table, mu_wall = spec_.friction.wall,
               mu_grip = spec_.friction.gripper;

  auto add_object = [&](ContactKind kind, int idx, const Vec2& p, const Vec2& n,
                        double depth, double mu) {
    Contact c;
    c.record = ContactRecord{kind, p, n, depth, 0.0, 0.0, mu};
    c.jn = ObjectPointJacobian(n, p - oc);
    c.jt = ObjectPointJacobian(Tangent(n), p - oc);
    c.key = {static_cast<int>(kind), idx};
    out.push_back(c);
  };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    if (p.y() < 0.0) add_object(ContactKind::kObjectTable, static_cast<int>(i), p, {0, 1}, -p.y(), mu_table);
    if (p.x() > 0.0) add_object(ContactKind::kObjectWall, static_cast<int>(i), p, {-1, 0}, p.x(), mu_wall);
  }

  const Vec2 g = gripper_pos_;
  const double r = config_.gripper_radius;
  auto add_gripper = [&](ContactKind kind, const Vec2& n, double depth, double mu) {
    Contact c;
    c.record = ContactRecord{kind, g - r * n, n, depth, 0.0, 0.0, mu};
    c.jn = GripperJacobian(n);
    c.jt = GripperJacobian(Tangent(n));
    c.key = {static_cast<int>(kind), 0};
    out.push_back(c);
  };
  if (g.y() < r) add_gripper(ContactKind::kGripperTable, {0, 1}, r - g.y(), mu_table);
  if (g.x() > -r) add_gripper(ContactKind::kGripperWall, {-1, 0}, g.x() + r, mu_wall);

  // Disc against the convex polygon.
  const std::size_t n = poly.size();
  double max_sd = -std::numeric_limits<double>::infinity();
  std::size_t max_edge = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = poly[(i + 1) % n] - poly[i];
    const Vec2 out_n = Vec2(e.y(), -e.x()).normalized();
    const double sd = out_n.dot(g - poly[i]);
    if (sd > max_sd) {
      max_sd = sd;
      max_edge = i;
    }
  }
  if (max_sd > r) return out;  // separated along some edge normal
  Vec2 closest, normal;
  double depth;
  if (max_sd <= 0.0) {
    const Vec2 e = poly[(max_edge + 1) % n] - poly[max_edge];
    normal = Vec2(e.y(), -e.x()).normalized();
    closest = g - max_sd * normal;
    depth = r - max_sd;
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = poly[i], b = poly[(i + 1) % n];
      const Vec2 e = b - a;
      const double t = std::clamp(e.dot(g - a) / e.squaredNorm(), 0.0, 1.0);
      const Vec2 p = a + t * e;
      const double d2 = (g - p).squaredNorm();
      if (d2 < best) {
        best = d2;
        closest = p;
      }
    }
    const double d = std::sqrt(best);
    if (d >= r) return out;
    normal = (g - closest) / d;
    depth = r - d;
  }
  Contact c;
  c.record = ContactRecord{ContactKind::kGripperObject, closest, normal, depth, 0.0, 0.0,
                           mu_grip};
  const Vec2 lever = AngularLever(closest - oc);
  const Vec2 t = Tangent(normal);
  c.jn << -normal.x(), -normal.y(), -normal.dot(lever), normal.x(), normal.y();
  c.jt << -t.x(), -t.y(), -t.dot(lever), t.x(), t.y();
  c.key = {static_cast<int>(ContactKind::kGripperObject), 0};
  out.push_back(c);
  return out;
}

PlanarSim::ContactForce PlanarSim::EvaluateContact(Contact& c, const Vec5& v) const {
  const double kn = config_.contact_stiffness;
  const double zeta = config_.contact_damping_ratio;
  ContactForce out;
  out.cn = 2.0 * zeta * std::sqrt(kn * EffectiveMass(c.jn));
  out.fn = std::max(0.0, kn * c.record.depth - out.cn * c.jn.dot(v.transpose()));

  out.ct = 2.0 * zeta * std::sqrt(kn * EffectiveMass(c.jt));
  auto it = anchors_.find(c.key);
  out.stretch = it == anchors_.end() ? 0.0 : it->second;
  const double trial = -kn * out.stretch - out.ct * c.jt.dot(v.transpose());
  const double cap = c.record.mu * out.fn;
  out.stick = out.fn > 0.0 && std::abs(trial) <= cap;
  if (out.stick) {
    out.ft = trial;
  } else {
    out.ft = out.fn > 0.0 ? std::copysign(cap, trial) : 0.0;
    out.stretch = -out.ft / kn;
  }
  c.record.normal_force = out.fn;
  c.record.tangent_force = out.ft;
  return out;
}

std::vector<ContactRecord> PlanarSim::Contacts() const {
  std::vector<ContactRecord> out;
  const Vec5 v = Velocity();
  for (Contact& c : FindContacts()) {
    EvaluateContact(c, v);
    out.push_back(c.record);
  }
  return out;
}

void PlanarSim::Substep(const Vec2& setpoint, StepStats* stats,
                        std::vector<ContactRecord>* contacts) {
  const double h = config_.dt;
  const Vec5 v = Velocity();
  Vec5 f = Vec5::Zero();
  Mat5 k = Mat5::Zero(), d = Mat5::Zero();

  f(1) -= mass_ * config_.gravity;

  // Impedance spring on the gripper, saturating per axis.
  const double kg = config_.gripper_stiffness;
  const double cg =
      2.0 * config_.gripper_damping_ratio * std::sqrt(kg * config_.gripper_mass);
  for (int a = 0; a < 2; ++a) {
    const double raw = kg * (setpoint(a) - gripper_pos_(a)) - cg * gripper_vel_(a);
    if (std::abs(raw) <= config_.force_limit) {
      f(3 + a) += raw;
      k(3 + a, 3 + a) -= kg;
      d(3 + a, 3 + a) -= cg;
      wrist_force_(a) = raw;
    } else {
      const double sat = std::copysign(config_.force_limit, raw);
      f(3 + a) += sat;
      wrist_force_(a) = sat;
    }
  }

  std::vector<Contact> found = FindContacts();
  std::map<std::pair<int, int>, double> next_anchors;
  for (Contact& c : found) {
    const ContactForce cf = EvaluateContact(c, v);
    f += c.jn.transpose() * cf.fn + c.jt.transpose() * cf.ft;
    if (cf.fn > 0.0) {
      k -= config_.contact_stiffness * c.jn.transpose() * c.jn;
      d -= cf.cn * c.jn.transpose() * c.jn;
    }
    if (cf.stick) {
      k -= config_.contact_stiffness * c.jt.transpose() * c.jt;
      d -= cf.ct * c.jt.transpose() * c.jt;
    }
    next_anchors[c.key] = cf.stretch;

    if (stats) {
      ++stats->contact_count;
      stats->max_friction_excess = std::max(stats->max_friction_excess,
                                            std::abs(cf.ft) - c.record.mu * cf.fn);
      if (c.record.kind == ContactKind::kObjectTable ||
          c.record.kind == ContactKind::kObjectWall) {
        stats->max_object_penetration =
            std::max(stats->max_object_penetration, c.record.depth);
      }
      if (c.record.kind == ContactKind::kGripperObject) {
        stats->gripper_object_contact = true;
      }
    }
    if (contacts) contacts->push_back(c.record);
  }

  const Mat5 lhs = mass_matrix_ - h * d - h * h * k;
  const Vec5 rhs = (mass_matrix_ - h * d) * v + h * f;
  const Vec5 vn = lhs.partialPivLu().solve(rhs);

  for (const Contact& c : found) next_anchors[c.key] += h * c.jt.dot(vn.transpose());
  anchors_ = std::move(next_anchors);

  object_.vx = vn(0);
  object_.vz = vn(1);
  object_.omega = vn(2);
  object_.x += h * vn(0);
  object_.z += h * vn(1);
  object_.theta = WrapAngle(object_.theta + h * vn(2));
  gripper_vel_ = vn.tail<2>();
  gripper_pos_ += h * gripper_vel_;
  time_ += h;
}

StepStats PlanarSim::ControlStep(const Eigen::Vector4d& action) {
  if (!action.allFinite()) throw InvalidInput("PlanarSim::ControlStep: non-finite action");
  const Eigen::Vector4d a = action.cwiseMax(-1.0).cwiseMin(1.0);
  Vec2 disp = config_.max_step_displacement * Vec2(a(0), a(2));
  const double norm = disp.norm();
  if (norm > config_.max_step_displacement) {
    disp *= config_.max_step_displacement / norm;
  }
  const Vec2 start = gripper_pos_;
  Vec2 target = start + disp;
  target.x() = std::clamp(target.x(), config_.workspace_min_x, config_.workspace_max_x);
  target.y() = std::clamp(target.y(), config_.workspace_min_z, config_.workspace_max_z);

  StepStats stats;
  stats.commanded_displacement = (target - start).norm();
  const int n = config_.substeps;
  for (int i = 1; i <= n; ++i) {
    const double alpha = static_cast<double>(i) / n;
    Substep(start + alpha * (target - start), &stats);
  }
  gripper_pitch_ = WrapAngle(gripper_pitch_ + config_.max_step_rotation * a(3));
  return stats;
}

void PlanarSim::Settle(double seconds) {
  const Vec2 hold = gripper_pos_;
  const int n = static_cast<int>(std::lround(seconds / config_.dt));
  for (int i = 0; i < n; ++i) Substep(hold);
}

}  // namespace pivot
