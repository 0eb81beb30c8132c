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

// Pivoting environment: reset randomization, noisy observations, reward and
// success bookkeeping around PlanarSim.
//
// Observation layout (17):
//   0-2   object position x, y, z
//   3-6   object quaternion w, x, y, z
//   7-9   gripper position x, y, z
//   10-13 gripper quaternion w, x, y, z
//   14-16 normalized wrist force f_x, f_y, f_z

#ifndef PIVOT_ENV_H_
#define PIVOT_ENV_H_

#include <memory>
#include <optional>

#include <Eigen/Core>

#include "pivot/core_math.h"
#include "pivot/rng.h"
#include "pivot/shapes.h"
#include "pivot/sim.h"

namespace pivot {

inline constexpr int kObsDim = 17;
inline constexpr int kActDim = 4;
using Observation = Eigen::Matrix<double, kObsDim, 1>;
using Action = Eigen::Vector4d;

namespace obs_index {
inline constexpr int kObjectPos = 0;
inline constexpr int kObjectQuat = 3;
inline constexpr int kGripperPos = 7;
inline constexpr int kGripperQuat = 10;
inline constexpr int kForce = 14;
}  // namespace obs_index

// per_step redraws the position offset on every observation; per_episode
// draws it once at reset.
enum class WallOffsetMode { kPerStep, kPerEpisode };

struct EnvConfig {
  SimConfig sim;
  int horizon = 100;               // control steps
  double position_noise_std = 0.02;  // m
  double force_noise_std = 0.5;      // N
  double force_cap = 10.0;           // N, also the normalizer
  double force_obs_limit = 1.5;      // after normalization
  double max_initial_offset = 0.05;  // m
  WallOffsetMode wall_offset_mode = WallOffsetMode::kPerStep;
  double settle_time = 0.5;          // s of physics after placement
  double success_angle_tol = 10.0 * kPi / 180.0;
  double success_rate_tol = 0.05;    // rad/s
  int success_hold_steps = 20;
  bool terminate_on_success = true;
};

// Throws ConfigError naming the first bad field.
void ValidateEnvConfig(const EnvConfig& cfg);

// arctan(delta_x / (l_x / 2)).
double PitchLimit(double delta_x, double lx);
RotMat GoalRotation();

struct NoiseDraw {
  Eigen::Vector3d position_offset = Eigen::Vector3d::Zero();
  Eigen::Vector3d force_noise = Eigen::Vector3d::Zero();
};

// Assembles the observation from ground truth. The same position offset is
// added to object and gripper positions: both are measured from a wall
// whose location is uncertain.
Observation AssembleObservation(const BodyState& object, const Vec2& gripper,
                                double gripper_pitch, const Vec2& wrist_force,
                                const NoiseDraw& noise, const EnvConfig& cfg);

// Counts consecutive control steps inside the stand-up tolerance.
class SuccessTracker {
 public:
  explicit SuccessTracker(const EnvConfig& cfg) : cfg_(cfg) {}
  // Returns true once the pose has held for the configured number of steps.
  bool Update(double theta, double omega);
  bool InTolerance(double theta, double omega) const;
  int streak() const { return streak_; }
  void Reset() { streak_ = 0; }

 private:
  EnvConfig cfg_;
  int streak_ = 0;
};

struct ResetOptions {
  std::optional<double> delta_x;
  std::optional<double> pitch;
  bool settle = true;
};

struct ResetInfo {
  double delta_x = 0.0;
  double pitch_limit = 0.0;
  double initial_pitch = 0.0;
};

struct StepInfo {
  int t = 0;
  bool success = false;  // latched once reached
  bool truncated = false;
  BodyState object;
  Vec2 gripper = Vec2::Zero();
  double gripper_pitch = 0.0;
  Vec2 raw_force = Vec2::Zero();
  StepStats stats;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

class PivotEnv {
 public:
  explicit PivotEnv(EnvConfig cfg = {});

  const EnvConfig& config() const { return cfg_; }
  void set_terminate_on_success(bool v) { cfg_.terminate_on_success = v; }

  Observation Reset(const ObjectSpec& spec, SeededRng& rng,
                    const ResetOptions& options = {});
  // Throws UsageError before Reset or after done.
  StepResult Step(const Action& action);
  // Fresh noisy observation of the current truth.
  Observation Observe();

  const PlanarSim& sim() const;
  PlanarSim& mutable_sim();
  const ResetInfo& reset_info() const { return reset_info_; }
  int t() const { return t_; }
  bool done() const { return done_; }
  bool succeeded() const { return success_; }
  double Reward() const;

 private:
  NoiseDraw DrawNoise();

  EnvConfig cfg_;
  std::unique_ptr<PlanarSim> sim_;
  SeededRng noise_rng_;
  Eigen::Vector3d episode_offset_ = Eigen::Vector3d::Zero();
  SuccessTracker tracker_;
  ResetInfo reset_info_;
  int t_ = 0;
  bool done_ = true;
  bool success_ = false;
};

}  // namespace pivot

#endif  // PIVOT_ENV_H_
