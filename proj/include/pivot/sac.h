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

// Soft actor-critic for the unitary pivoting policy, plus the episode
// collection and evaluation helpers every later stage reuses.

#ifndef PIVOT_SAC_H_
#define PIVOT_SAC_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "pivot/autodiff.h"
#include "pivot/env.h"
#include "pivot/nn.h"
#include "pivot/rng.h"

namespace pivot {

// Per-dimension input scale applied before every network: positions are
// multiplied by 10 so all inputs are O(1).
const Vector& ObservationScale();
Matrix ScaleObservations(const Matrix& obs);  // rows are observations

// Tanh-squashed diagonal Gaussian policy over the 4 action dims. The net
// outputs [mean (4), log_std (4)] of the pre-squash Gaussian.
class Policy {
 public:
  Policy() = default;
  Policy(SeededRng& rng, const std::vector<int>& hidden = {128, 128});

  DenseNet& net() { return net_; }
  const DenseNet& net() const { return net_; }

  GaussianHead Head(const Observation& s) const;
  Action Deterministic(const Observation& s) const;  // tanh(mean)
  Action Sample(const Observation& s, SeededRng& rng) const;

  struct TapeOutput {
    Var mean, log_std;  // pre-squash, log_std clamped
    Var action;         // tanh(mean + std * noise)
    Var log_prob;       // B x 1, includes the tanh correction
  };
  // obs rows are raw observations; noise is B x 4 standard normal.
  TapeOutput Forward(Tape& tape, const Matrix& obs, const Matrix& noise,
                     bool trainable = true);

 private:
  DenseNet net_;
};

struct Transition {
  Observation obs;
  Action action;
  double reward = 0.0;
  Observation next_obs;
  bool terminal = false;  // bootstrap is cut only for true terminals
};

struct Trajectory {
  std::vector<Transition> steps;
  bool success = false;
  double Return(double gamma = 1.0) const;
};

using ActorFn = std::function<Action(const Observation&)>;

// Runs one episode until done. Success endings and horizon truncation are
// stored as non-terminal.
Trajectory CollectEpisode(PivotEnv& env, const ObjectSpec& spec, SeededRng& env_rng,
                          const ActorFn& actor);

enum class ActMode { kStochastic, kDeterministic };
Trajectory CollectEpisode(PivotEnv& env, const ObjectSpec& spec, SeededRng& env_rng,
                          const Policy& policy, ActMode mode, SeededRng& act_rng);

struct Batch {
  Matrix obs, act, next_obs;  // rows are transitions
  Vector rew, done;
  Eigen::Index size() const { return obs.rows(); }
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);
  void Add(const Transition& t);
  int size() const { return size_; }
  int capacity() const { return capacity_; }
  // Uniform with replacement over [0, size).
  Batch Sample(int n, SeededRng& rng) const;
  std::vector<int> SampleIndices(int n, SeededRng& rng) const;
  Batch Gather(const std::vector<int>& idx) const;

 private:
  int capacity_;
  int size_ = 0;
  int next_ = 0;
  Matrix obs_, act_, next_obs_;
  Vector rew_, done_;
};

struct SacConfig {
  int batch_size = 1024;
  double lr_q = 5e-3;
  double lr_pi = 3e-4;
  double lr_alpha = 3e-4;
  double gamma = 0.99;
  double tau = 0.005;
  double target_entropy = -4.0;
  std::vector<int> policy_hidden = {128, 128};
  std::vector<int> q_hidden = {256, 256};
  int replay_capacity = 200000;
  int warmup_steps = 2000;  // uniform-random actions before learning
  int episodes = 3000;
  // Gradient steps per environment step after warmup.
  double updates_per_step = 0.15;
  int eval_every = 50;      // episodes
  int eval_episodes = 20;
};

// Throws ConfigError naming the offending field.
void ValidateSacConfig(const SacConfig& cfg);

struct SacLosses {
  double loss_q = 0.0;
  double loss_pi = 0.0;
  double alpha = 0.0;
};

class SacAgent {
 public:
  SacAgent(const SacConfig& cfg, SeededRng& rng);
  SacAgent(const SacAgent&) = delete;
  SacAgent& operator=(const SacAgent&) = delete;

  Policy& policy() { return policy_; }
  const Policy& policy() const { return policy_; }
  DenseNet& q(int i) { return i == 0 ? q1_ : q2_; }
  DenseNet& q_target(int i) { return i == 0 ? q1_target_ : q2_target_; }
  double alpha() const;
  double log_alpha() const { return log_alpha_.value(0, 0); }
  Parameter& log_alpha_param() { return log_alpha_; }
  const SacConfig& config() const { return cfg_; }

  // Q(s, a) for every row, B x 1.
  Matrix QValues(const DenseNet& q, const Matrix& obs, const Matrix& act) const;
  // r + gamma (1 - done) (min target Q(s', a') - alpha log pi(a'|s')).
  Vector QTarget(const Batch& b, const Matrix& next_noise) const;

  // Differentiable pieces, exposed for gradient checks.
  Var QLoss(Tape& tape, const Batch& b, const Vector& target);
  Var PolicyLoss(Tape& tape, const Batch& b, const Matrix& noise, Vector* log_prob);
  Var AlphaLoss(Tape& tape, const Vector& log_prob);

  // One update of temperature, policy and twin Q, then Polyak targets.
  SacLosses UpdateOnBatch(const Batch& b, SeededRng& rng);
  // Throws UsageError when the buffer holds fewer than batch_size items.
  SacLosses Update(const ReplayBuffer& buffer, SeededRng& rng);

 private:
  SacConfig cfg_;
  Policy policy_;
  DenseNet q1_, q2_, q1_target_, q2_target_;
  Parameter log_alpha_;
  Adam pi_opt_, q_opt_, alpha_opt_;
};

struct EvalResult {
  double mean_return = 0.0;
  double success_rate = 0.0;
};

// Deterministic rollouts of `actor`, each on a fresh reset drawn from rng.
EvalResult Evaluate(PivotEnv& env, const ObjectSpec& spec, const ActorFn& actor,
                    int episodes, SeededRng& rng);

struct CurveRow {
  int episodes = 0;
  std::int64_t env_steps = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;
  double loss_q = 0.0;
  double loss_pi = 0.0;
  double alpha = 0.0;
};

struct TrainResult {
  Policy policy;
  std::vector<CurveRow> curve;
};

// Trains on the unitary object with full domain randomization. `progress`
// (optional) sees every curve row as it is produced.
TrainResult TrainUnitary(const SacConfig& cfg, const EnvConfig& env_cfg,
                         std::uint64_t seed,
                         const std::function<void(const CurveRow&)>& progress = {});

}  // namespace pivot

#endif  // PIVOT_SAC_H_
