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

// Planar (X-Z) rigid-body simulator for one object, a disc gripper, the
// table (z = 0) and the wall (x = 0). The object lives at x < 0.
//
// Generalized coordinates are q = (object x, object z, object pitch,
// gripper x, gripper z), where the object position is its centroid. Pitch
// follows R_y: a body point (bx, bz) maps to
// (cos t * bx + sin t * bz, -sin t * bx + cos t * bz).
//
// Contacts are penalty springs with critical damping and Coulomb friction
// regularized by a tangential stick spring. Each substep is a linearly
// implicit Euler step:
//   (M - h D - h^2 K) v+ = (M - h D) v + h F,   q+ = q + h v+.

#ifndef PIVOT_SIM_H_
#define PIVOT_SIM_H_

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pivot/shapes.h"

namespace pivot {

struct SimConfig {
  double dt = 1e-3;       // s
  int substeps = 50;      // per control step
  double gravity = 9.81;  // m/s^2
  double contact_stiffness = 2e4;     // N/m, normal and tangential
  double contact_damping_ratio = 1.0;
  double gripper_radius = 0.01;       // m
  double gripper_mass = 0.3;          // kg
  double gripper_stiffness = 12000.0; // N/m, 12 N/mm
  double gripper_damping_ratio = 1.0;
  double force_limit = 10.0;          // N per axis on the impedance spring
  double max_step_displacement = 0.025;  // m per control step
  double max_step_rotation = 0.15;       // rad per control step
  // Setpoints are kept inside this box.
  double workspace_min_x = -0.40, workspace_max_x = 0.0;
  double workspace_min_z = 0.0, workspace_max_z = 0.30;
};

// Throws ConfigError naming the first bad field.
void ValidateSimConfig(const SimConfig& cfg);

struct BodyState {
  double x = 0.0, z = 0.0, theta = 0.0;
  double vx = 0.0, vz = 0.0, omega = 0.0;
};

enum class ContactKind {
  kObjectTable = 0,
  kObjectWall = 1,
  kGripperObject = 2,
  kGripperTable = 3,
  kGripperWall = 4,
};

// Forces evaluated at the start of a substep, before the implicit solve.
struct ContactRecord {
  ContactKind kind = ContactKind::kObjectTable;
  Vec2 point = Vec2::Zero();   // world
  Vec2 normal = Vec2::Zero();  // pushes the first-named body
  double depth = 0.0;
  double normal_force = 0.0;
  double tangent_force = 0.0;  // signed, along the contact tangent
  double mu = 0.0;
};

// Aggregates over the substeps of one control step.
struct StepStats {
  double commanded_displacement = 0.0;  // m, planar
  double max_object_penetration = 0.0;  // m, table and wall only
  double max_friction_excess = -1e300;  // max of |f_t| - mu f_n
  int contact_count = 0;                // summed over substeps
  bool gripper_object_contact = false;
};

class PlanarSim {
 public:
  PlanarSim(const ObjectSpec& spec, const SimConfig& config);

  const ObjectSpec& spec() const { return spec_; }
  const SimConfig& config() const { return config_; }

  // Places the object by its body origin (bottom-middle of the bounding box).
  void SetObjectPose(double origin_x, double origin_z, double theta);
  void SetObjectState(const BodyState& s) { object_ = s; }
  void SetGripper(const Vec2& position, double pitch);
  void ClearFrictionState() { anchors_.clear(); }

  // One control step with a = (a_x, a_y, a_z, a_rho) in [-1, 1]. a_y has no
  // planar effect. Returns per-step diagnostics.
  StepStats ControlStep(const Eigen::Vector4d& action);
  // Integrates with the gripper spring anchored at `setpoint`.
  void Substep(const Vec2& setpoint, StepStats* stats = nullptr,
               std::vector<ContactRecord>* contacts = nullptr);
  // Runs substeps holding the gripper setpoint at its current position.
  void Settle(double seconds);

  const BodyState& object() const { return object_; }
  Vec2 gripper_position() const { return gripper_pos_; }
  Vec2 gripper_velocity() const { return gripper_vel_; }
  double gripper_pitch() const { return gripper_pitch_; }
  // Impedance spring force on the gripper, clamped to the force limit.
  Vec2 wrist_force() const { return wrist_force_; }
  double time() const { return time_; }

  Polygon WorldPolygon() const;
  Vec2 BodyToWorld(const Vec2& body_point) const;
  // Body-frame centroid of the cross-section.
  const Vec2& centroid() const { return centroid_; }

  // Kinetic + gravitational + elastic energy of the object's table and wall
  // contact springs, J.
  double ObjectEnergy() const;
  double ObjectMass() const { return mass_; }
  double ObjectInertia() const { return inertia_; }
  // Contacts as seen at the current state.
  std::vector<ContactRecord> Contacts() const;

 private:
  struct Contact {
    ContactRecord record;
    Eigen::Matrix<double, 1, 5> jn, jt;
    std::pair<int, int> key;
  };
  using Vec5 = Eigen::Matrix<double, 5, 1>;
  using Mat5 = Eigen::Matrix<double, 5, 5>;

  struct ContactForce {
    double fn = 0.0, ft = 0.0, cn = 0.0, ct = 0.0, stretch = 0.0;
    bool stick = false;
  };

  std::vector<Contact> FindContacts() const;
  // Fills the record's forces from the current stretch and velocity.
  ContactForce EvaluateContact(Contact& c, const Vec5& v) const;
  Vec5 Velocity() const;
  double EffectiveMass(const Eigen::Matrix<double, 1, 5>& j) const;

  ObjectSpec spec_;
  SimConfig config_;
  Vec2 centroid_;
  double mass_, inertia_;
  Mat5 mass_matrix_;
  BodyState object_;
  Vec2 gripper_pos_ = Vec2(-0.2, 0.1);
  Vec2 gripper_vel_ = Vec2::Zero();
  double gripper_pitch_ = 0.0;
  Vec2 wrist_force_ = Vec2::Zero();
  double time_ = 0.0;
  std::map<std::pair<int, int>, double> anchors_;  // tangential stretch
};

}  // namespace pivot

#endif  // PIVOT_SIM_H_
