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

// Policy adaptation through learned state and action projections.
//
// A frozen unitary policy pi_u is reused on a new object with feature f:
//   s_bar = T_s s,   a_bar ~ pi_u(. | s_bar),   a = clamp(T_a a_bar, -1, 1)
// where T_s = diag(rho_phi(f)) scales the object and gripper positions and
// T_a = diag(rho_psi(f, s_bar)) scales the action. Both projection nets are
// diagonal-Gaussian policies trained with a clipped likelihood-ratio
// objective on per-episode (T_s) and per-step (T_a) advantages.

#ifndef PIVOT_ADAPT_H_
#define PIVOT_ADAPT_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pivot/env.h"
#include "pivot/nn.h"
#include "pivot/rng.h"
#include "pivot/sac.h"
#include "pivot/shapes.h"

namespace pivot {

inline constexpr int kStateProjDim = 3;
inline constexpr int kActionProjDim = 4;
inline constexpr double kProjectionInitLogStd = -1.5;
// Sub-stream of the Algorithm 1 seed reserved for pool evaluation.
inline constexpr std::uint64_t kPoolEvalStream = 1000000;

enum class AdaptMode { kFull, kNoState, kNoAction, kFinetune, kNnProjection };
const char* AdaptModeName(AdaptMode m);
// Throws InvalidInput for unknown names.
AdaptMode ParseAdaptMode(const std::string& name);

enum class ClipForm { kPaper, kStandard };
const char* ClipFormName(ClipForm c);
ClipForm ParseClipForm(const std::string& name);

// One sampled (or mean) diagonal transform and its log-likelihood under the
// head that produced it.
struct DiagonalTransform {
  Vector diag;
  double log_prob = 0.0;
};

// Scales object position (0..2) and gripper position (7..9) by T_s.
// Throws InvalidInput unless ts has 3 entries.
Observation ProjectState(const Observation& s, const Vector& ts);

// Dense Gaussian head. In diagonal mode the mean is 1 + raw and the final
// layer starts at zero, so the initial mean transform is exactly identity
// with log-std kProjectionInitLogStd.
class ProjectionNet {
 public:
  ProjectionNet() = default;
  ProjectionNet(int input_dim, int hidden, int output_dim, bool identity_init,
                SeededRng& rng, const std::string& name);

  DenseNet& net() { return net_; }
  const DenseNet& net() const { return net_; }
  int output_dim() const { return out_dim_; }
  bool identity_offset() const { return identity_offset_; }

  GaussianHead Head(const Vector& input) const;
  DiagonalTransform Sample(const Vector& input, SeededRng& rng) const;
  DiagonalTransform Mean(const Vector& input) const;
  double LogProb(const Vector& input, const Vector& value) const;
  // Row-wise log-likelihood of `values` (B x out) for `inputs` (B x in).
  Var LogProb(Tape& tape, const Matrix& inputs, const Matrix& values);

 private:
  DenseNet net_;
  int out_dim_ = 0;
  bool identity_offset_ = false;
};

// Inputs of the projection nets.
Vector StateNetInput(const Vector& feature);
Vector ActionNetInput(const Vector& feature, const Observation& s_bar);
Vector NnStateInput(const Vector& feature, const Observation& s);

struct AdaptStep {
  Observation s;
  Observation s_bar;
  Action a_bar = Action::Zero();   // unitary action on s_bar
  Action u = Action::Zero();       // pre-squash sample behind a_bar
  double u_log_prob = 0.0;         // Gaussian log-density of u
  DiagonalTransform ta;            // identity in no_action / finetune
  DiagonalTransform s_bar_sample;  // nn_projection only
  Action a = Action::Zero();
  double r = 0.0;
  Vec2 object_xz = Vec2::Zero();  // true object position after the step
};

struct AdaptTrajectory {
  int object = -1;
  Vector feature;
  DiagonalTransform ts;  // one per episode
  std::vector<AdaptStep> steps;
  bool success = false;
  double Return() const;
};

// Raw advantages with r_1..r_T and discount exponent i - 1:
//   A_s = (1/T) sum_{i=1}^T gamma^(i-1) r_i
//   A_a[t] = sum_{i=t}^T gamma^(i-1) r_i
struct Advantages {
  double a_s = 0.0;
  std::vector<double> a_a;
};
// Throws InvalidInput on an empty trajectory.
Advantages ComputeAdvantages(const AdaptTrajectory& tau, double gamma);
Advantages ComputeAdvantages(const std::vector<double>& rewards, double gamma);
// Standardizes A_s across episodes and A_a across all steps (mean 0, std 1;
// only centered when the std is zero). A group with fewer than two values
// is left raw.
void StandardizeAdvantages(std::vector<Advantages>& adv);

// Paper form: min(ratio, clip(ratio, 1 - eps, 1 + eps)) * A.
// Standard form: min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A).
// Throws InvalidInput when ratio <= 0 or eps outside (0, 1).
double ClippedSurrogate(double ratio, double advantage, double eps,
                        ClipForm form = ClipForm::kPaper);
// Tape version over B x 1 ratios and constant advantages.
Var ClippedSurrogate(Var ratio, const Vector& advantage, double eps, ClipForm form);

// Mean over rows of the clipped surrogate of `values` under `net`, with
// ratios taken against the recorded old log-likelihoods.
Var ProjectionObjective(Tape& tape, ProjectionNet& net, const Matrix& inputs,
                        const Matrix& values, const Vector& old_log_prob,
                        const Vector& advantage, double eps, ClipForm form);

// The adapted policy: frozen unitary policy plus the mode's trainable parts.
class Adapter {
 public:
  Adapter(const Policy& unitary, AdaptMode mode, SeededRng& rng);

  AdaptMode mode() const { return mode_; }
  const Policy& unitary() const { return unitary_; }
  Policy& finetuned() { return finetuned_; }
  const Policy& finetuned() const { return finetuned_; }
  ProjectionNet& state_net() { return state_net_; }
  const ProjectionNet& state_net() const { return state_net_; }
  ProjectionNet& action_net() { return action_net_; }
  const ProjectionNet& action_net() const { return action_net_; }

  // Parameters the mode trains, split into the state and action groups.
  std::vector<Parameter*> StateParameters();
  std::vector<Parameter*> ActionParameters();

  // Per-episode state transform: identity when the mode has none.
  DiagonalTransform StateTransform(const Vector& feature, ActMode act, SeededRng& rng) const;

  // Fills s_bar, a_bar, u, ta, s_bar_sample and a for one observation.
  // force_identity skips both projections (identity collapse).
  AdaptStep Act(const Observation& s, const Vector& feature, const DiagonalTransform& ts,
                ActMode act, SeededRng& rng, bool force_identity = false) const;

 private:
  AdaptMode mode_;
  Policy unitary_;    // never modified
  Policy finetuned_;  // finetune mode only
  ProjectionNet state_net_, action_net_;
};

AdaptTrajectory CollectAdaptEpisode(PivotEnv& env, const ObjectSpec& spec, int object,
                                    const Vector& feature, const Adapter& adapter,
                                    ActMode act, SeededRng& env_rng, SeededRng& act_rng,
                                    bool force_identity = false);

struct AdaptConfig {
  AdaptMode mode = AdaptMode::kFull;
  ClipForm clip_form = ClipForm::kPaper;
  int iterations = 60;
  int episodes_per_iteration = 200;  // K
  int epochs = 10;                   // M
  double gamma = 0.99;
  double clip_state = 0.2;
  double clip_action = 0.2;
  double lr_state = 1e-3;
  double lr_action = 3e-5;
  int eval_trials = 3;  // per pool object
};

void ValidateAdaptConfig(const AdaptConfig& cfg);

struct UpdateStats {
  double state_loss = 0.0;   // surrogate objective being ascended
  double action_loss = 0.0;
};

// M epochs of full-batch Adam ascent on the clipped surrogates. Old
// log-likelihoods are the values recorded at collection.
UpdateStats UpdateProjections(Adapter& adapter, const std::vector<AdaptTrajectory>& batch,
                              const AdaptConfig& cfg, Adam& state_opt, Adam& action_opt);

struct AdaptCurveRow {
  int iteration = 0;
  double mean_return = 0.0;        // over the stochastic training batch
  double pool_success_rate = 0.0;  // deterministic, before the update
  double mean_ts_diag = 1.0;
  double mean_ta_diag = 1.0;
  double state_loss = 0.0;
  double action_loss = 0.0;
};

struct PoolEval {
  std::vector<int> successes;  // per object
  int trials = 0;              // per object
  double SuccessRate() const;
};

// Deterministic rollouts: `trials` resets per object from rng.
PoolEval EvaluatePool(const Adapter& adapter, const std::vector<ObjectSpec>& pool,
                      const std::vector<Vector>& features, const EnvConfig& env_cfg,
                      int trials, SeededRng& rng, bool force_identity = false);

struct AdaptResult {
  std::vector<AdaptCurveRow> curve;
};

// Algorithm 1 on `pool`. Objects are drawn uniformly with replacement. Each
// iteration first evaluates the pool (cfg.eval_trials per object, the same
// initial conditions every time), then collects and updates.
AdaptResult RunAlgorithm1(Adapter& adapter, const std::vector<ObjectSpec>& pool,
                          const std::vector<Vector>& features, const EnvConfig& env_cfg,
                          const AdaptConfig& cfg, SeededRng& rng,
                          const std::function<void(const AdaptCurveRow&)>& progress = {});

// Dynamic time warping distance with Euclidean step cost.
double DtwDistance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);
// Mean over all unordered pairs.
double MeanPairwiseDtw(const std::vector<std::vector<Vec2>>& trajectories);

struct ProjectedTraces {
  std::vector<std::vector<Vec2>> raw;        // object (x, z) per step
  std::vector<std::vector<Vec2>> projected;  // same points scaled by T_s
};
// One deterministic rollout per pool object.
ProjectedTraces TraceTrajectories(const Adapter& adapter, const std::vector<ObjectSpec>& pool,
                                  const std::vector<Vector>& features,
                                  const EnvConfig& env_cfg, SeededRng& rng);

}  // namespace pivot

#endif  // PIVOT_ADAPT_H_
