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

#include "pivot/env.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "pivot/errors.h"

namespace pivot {
namespace {

constexpr double kParkX = -0.35, kParkZ = 0.2;

void Require(bool ok, const std::string& field, const char* what) {
  if (!ok) throw ConfigError("env." + field + " " + what);
}

}  // namespace

void ValidateEnvConfig(const EnvConfig& c) {
  ValidateSimConfig(c.sim);
  Require(c.horizon > 0, "horizon", "must be positive");
  Require(c.position_noise_std >= 0, "position_noise_std", "must be non-negative");
  Require(c.force_noise_std >= 0, "force_noise_std", "must be non-negative");
  Require(c.force_cap > 0, "force_cap", "must be positive");
  Require(c.force_obs_limit > 0, "force_obs_limit", "must be positive");
  Require(c.max_initial_offset >= 0, "max_initial_offset", "must be non-negative");
  Require(c.settle_time >= 0, "settle_time", "must be non-negative");
  Require(c.success_angle_tol > 0, "success_angle_tol", "must be positive");
  Require(c.success_rate_tol > 0, "success_rate_tol", "must be positive");
  Require(c.success_hold_steps > 0, "success_hold_steps", "must be positive");
}

double PitchLimit(double delta_x, double lx) {
  if (!(lx > 0)) throw InvalidInput("PitchLimit: l_x must be positive");
  return std::atan(delta_x / (lx / 2));
}

RotMat GoalRotation() { return PitchMatrix(kHalfPi); }

Observation AssembleObservation(const BodyState& object, const Vec2& gripper,
                                double gripper_pitch, const Vec2& wrist_force,
                                const NoiseDraw& noise, const EnvConfig& cfg) {
  using namespace obs_index;
  Observation s;
  s.segment<3>(kObjectPos) = Eigen::Vector3d(object.x, 0.0, object.z) + noise.position_offset;
  const Quat qo = Quat::Pitch(object.theta);
  s.segment<4>(kObjectQuat) << qo.w, qo.x, qo.y, qo.z;
  s.segment<3>(kGripperPos) =
      Eigen::Vector3d(gripper.x(), 0.0, gripper.y()) + noise.position_offset;
  const Quat qg = Quat::Pitch(gripper_pitch);
  s.segment<4>(kGripperQuat) << qg.w, qg.x, qg.y, qg.z;
  const Eigen::Vector3d raw(wrist_force.x(), 0.0, wrist_force.y());
  const Eigen::Vector3d capped = raw.cwiseMax(-cfg.force_cap).cwiseMin(cfg.force_cap);
  s.segment<3>(kForce) = ((capped + noise.force_noise) / cfg.force_cap)
                             .cwiseMax(-cfg.force_obs_limit)
                             .cwiseMin(cfg.force_obs_limit);
  return s;
}

bool SuccessTracker::InTolerance(double theta, double omega) const {
  return std::abs(WrapAngle(theta - kHalfPi)) <= cfg_.success_angle_tol &&
         std::abs(omega) <= cfg_.success_rate_tol;
}

bool SuccessTracker::Update(double theta, double omega) {
  streak_ = InTolerance(theta, omega) ? streak_ + 1 : 0;
  return streak_ >= cfg_.success_hold_steps;
}

PivotEnv::PivotEnv(EnvConfig cfg) : cfg_(std::move(cfg)), tracker_(cfg_) {
  ValidateEnvConfig(cfg_);
}

const PlanarSim& PivotEnv::sim() const {
  if (!sim_) throw UsageError("PivotEnv: reset() has not been called");
  return *sim_;
}

PlanarSim& PivotEnv::mutable_sim() {
  if (!sim_) throw UsageError("PivotEnv: reset() has not been called");
  return *sim_;
}

Observation PivotEnv::Reset(const ObjectSpec& spec, SeededRng& rng,
                            const ResetOptions& options) {
  sim_ = std::make_unique<PlanarSim>(spec, cfg_.sim);
  const double lx = spec.size.x();
  const double dx = options.delta_x ? *options.delta_x
                                    : SampleUniform(rng, 0.0, cfg_.max_initial_offset);
  const double limit = PitchLimit(dx, lx);
  const double pitch = options.pitch ? *options.pitch : SampleUniform(rng, -limit, limit);
  reset_info_ = ResetInfo{dx, limit, pitch};

  // Lowest vertex on the table, nearest vertex dx from the wall.
  sim_->SetObjectPose(0.0, 0.0, pitch);
  double min_z = 1e300, max_x = -1e300;
  for (const Vec2& v : sim_->WorldPolygon()) {
    min_z = std::min(min_z, v.y());
    max_x = std::max(max_x, v.x());
  }
  sim_->SetObjectPose(-dx - max_x, -min_z, pitch);
  sim_->SetGripper(Vec2(kParkX, kParkZ), 0.0);
  if (options.settle && cfg_.settle_time > 0) sim_->Settle(cfg_.settle_time);

  // Gripper behind the far face and above the table, clear of the object.
  double min_x = 1e300, top = 0.0;
  for (const Vec2& v : sim_->WorldPolygon()) {
    min_x = std::min(min_x, v.x());
    top = std::max(top, v.y());
  }
  const double r = cfg_.sim.gripper_radius;
  const double gap = SampleUniform(rng, 0.005, 0.03);
  const double height = SampleUniform(rng, r + 0.002, top + 0.03);
  sim_->SetGripper(Vec2(min_x - r - gap, height), 0.0);

  noise_rng_ = SeededRng(rng.NextU64());
  episode_offset_.setZero();
  if (cfg_.wall_offset_mode == WallOffsetMode::kPerEpisode) {
    for (int i = 0; i < 3; ++i) {
      episode_offset_(i) = SampleGaussian(noise_rng_, 0.0, cfg_.position_noise_std);
    }
  }
  tracker_ = SuccessTracker(cfg_);
  t_ = 0;
  done_ = false;
  success_ = false;
  return Observe();
}

NoiseDraw PivotEnv::DrawNoise() {
  NoiseDraw n;
  if (cfg_.wall_offset_mode == WallOffsetMode::kPerStep) {
    for (int i = 0; i < 3; ++i) {
      n.position_offset(i) = SampleGaussian(noise_rng_, 0.0, cfg_.position_noise_std);
    }
  } else {
    n.position_offset = episode_offset_;
  }
  for (int i = 0; i < 3; ++i) {
    n.force_noise(i) = SampleGaussian(noise_rng_, 0.0, cfg_.force_noise_std);
  }
  return n;
}

Observation PivotEnv::Observe() {
  const PlanarSim& s = sim();
  return AssembleObservation(s.object(), s.gripper_position(), s.gripper_pitch(),
                             s.wrist_force(), DrawNoise(), cfg_);
}

double PivotEnv::Reward() const {
  return pivot::Reward(PitchMatrix(sim().object().theta), GoalRotation());
}

StepResult PivotEnv::Step(const Action& action) {
  if (!sim_) throw UsageError("PivotEnv::Step before Reset");
  if (done_) throw UsageError("PivotEnv::Step after episode end");
  StepResult out;
  out.info.stats = sim_->ControlStep(action);
  ++t_;
  const BodyState& o = sim_->object();
  if (tracker_.Update(o.theta, o.omega)) success_ = true;
  const bool timeout = t_ >= cfg_.horizon;
  done_ = timeout || (success_ && cfg_.terminate_on_success);
  out.reward = Reward();
  out.done = done_;
  out.obs = Observe();
  out.info.t = t_;
  out.info.success = success_;
  out.info.truncated = timeout;
  out.info.object = o;
  out.info.gripper = sim_->gripper_position();
  out.info.gripper_pitch = sim_->gripper_pitch();
  out.info.raw_force = sim_->wrist_force();
  return out;
}

}  // namespace pivot
