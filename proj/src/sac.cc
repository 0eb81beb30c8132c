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

#include "pivot/sac.h"

#include <cmath>
#include <string>

#include "pivot/errors.h"

namespace pivot {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kSquashEps = 1e-6;

std::vector<int> Dims(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> d{in};
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(out);
  return d;
}

Matrix GaussianMatrix(Eigen::Index rows, Eigen::Index cols, SeededRng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.NextGaussian();
  }
  return m;
}

Matrix QInput(const Matrix& obs, const Matrix& act) {
  Matrix in(obs.rows(), obs.cols() + act.cols());
  in << ScaleObservations(obs), act;
  return in;
}

void Check(bool ok, const std::string& field, const char* what) {
  if (!ok) throw ConfigError("sac." + field + " " + what);
}

}  // namespace

const Vector& ObservationScale() {
  static const Vector scale = [] {
    Vector s = Vector::Ones(kObsDim);
    s.segment<3>(obs_index::kObjectPos).setConstant(10.0);
    s.segment<3>(obs_index::kGripperPos).setConstant(10.0);
    return s;
  }();
  return scale;
}

Matrix ScaleObservations(const Matrix& obs) {
  if (obs.cols() != kObsDim) throw InvalidInput("ScaleObservations: expected 17 columns");
  return obs * ObservationScale().asDiagonal();
}

Policy::Policy(SeededRng& rng, const std::vector<int>& hidden)
    : net_(Dims(kObsDim, hidden, 2 * kActDim), Activation::kRelu, rng, "policy") {}

GaussianHead Policy::Head(const Observation& s) const {
  const Vector out = net_.Forward(Vector(s.cwiseProduct(ObservationScale())));
  return GaussianHead(out.head(kActDim), out.tail(kActDim));
}

Action Policy::Deterministic(const Observation& s) const {
  return Head(s).mean.array().tanh().matrix();
}

Action Policy::Sample(const Observation& s, SeededRng& rng) const {
  const GaussianHead head = Head(s);
  Action a;
  for (int i = 0; i < kActDim; ++i) {
    a(i) = std::tanh(head.mean(i) + std::exp(head.log_std(i)) * rng.NextGaussian());
  }
  return a;
}

Policy::TapeOutput Policy::Forward(Tape& tape, const Matrix& obs, const Matrix& noise,
                                   bool trainable) {
  if (noise.rows() != obs.rows() || noise.cols() != kActDim) {
    throw InvalidInput("Policy::Forward: noise must be B x 4");
  }
  Var out = net_.Forward(tape, tape.Constant(ScaleObservations(obs)), trainable);
  TapeOutput o;
  o.mean = ad::SliceCols(out, 0, kActDim);
  o.log_std = ad::Clamp(ad::SliceCols(out, kActDim, kActDim), kLogStdMin, kLogStdMax);
  Var u = ad::RSample(o.mean, o.log_std, noise);
  o.log_prob = ad::Sub(ad::GaussianLogProb(u, o.mean, o.log_std), ad::TanhLogDetJacobian(u));
  o.action = ad::Tanh(u);
  return o;
}

double Trajectory::Return(double gamma) const {
  double ret = 0.0, discount = 1.0;
  for (const Transition& t : steps) {
    ret += discount * t.reward;
    discount *= gamma;
  }
  return ret;
}

Trajectory CollectEpisode(PivotEnv& env, const ObjectSpec& spec, SeededRng& env_rng,
                          const ActorFn& actor) {
  Trajectory traj;
  Observation obs = env.Reset(spec, env_rng);
  for (;;) {
    const Action a = actor(obs);
    const StepResult r = env.Step(a);
    traj.steps.push_back(Transition{obs, a, r.reward, r.obs, false});
    obs = r.obs;
    if (r.done) break;
  }
  traj.success = env.succeeded();
  return traj;
}

Trajectory CollectEpisode(PivotEnv& env, const ObjectSpec& spec, SeededRng& env_rng,
                          const Policy& policy, ActMode mode, SeededRng& act_rng) {
  if (mode == ActMode::kDeterministic) {
    return CollectEpisode(env, spec, env_rng,
                          [&](const Observation& s) { return policy.Deterministic(s); });
  }
  return CollectEpisode(env, spec, env_rng,
                        [&](const Observation& s) { return policy.Sample(s, act_rng); });
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw InvalidInput("ReplayBuffer: capacity must be positive");
  obs_.resize(capacity, kObsDim);
  next_obs_.resize(capacity, kObsDim);
  act_.resize(capacity, kActDim);
  rew_.resize(capacity);
  done_.resize(capacity);
}

void ReplayBuffer::Add(const Transition& t) {
  obs_.row(next_) = t.obs.transpose();
  act_.row(next_) = t.action.transpose();
  rew_(next_) = t.reward;
  next_obs_.row(next_) = t.next_obs.transpose();
  done_(next_) = t.terminal ? 1.0 : 0.0;
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::vector<int> ReplayBuffer::SampleIndices(int n, SeededRng& rng) const {
  if (size_ == 0) throw UsageError("ReplayBuffer: sampling from an empty buffer");
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int& i : idx) i = static_cast<int>(rng.NextBelow(static_cast<std::uint64_t>(size_)));
  return idx;
}

Batch ReplayBuffer::Gather(const std::vector<int>& idx) const {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Batch b{Matrix(n, kObsDim), Matrix(n, kActDim), Matrix(n, kObsDim), Vector(n), Vector(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const int i = idx[static_cast<std::size_t>(k)];
    if (i < 0 || i >= size_) throw InvalidInput("ReplayBuffer: index out of range");
    b.obs.row(k) = obs_.row(i);
    b.act.row(k) = act_.row(i);
    b.next_obs.row(k) = next_obs_.row(i);
    b.rew(k) = rew_(i);
    b.done(k) = done_(i);
  }
  return b;
}

Batch ReplayBuffer::Sample(int n, SeededRng& rng) const {
  return Gather(SampleIndices(n, rng));
}

void ValidateSacConfig(const SacConfig& c) {
  Check(c.batch_size > 0, "batch_size", "must be positive");
  Check(c.lr_q > 0, "lr_q", "must be positive");
  Check(c.lr_pi > 0, "lr_pi", "must be positive");
  Check(c.lr_alpha > 0, "lr_alpha", "must be positive");
  Check(c.gamma > 0 && c.gamma < 1, "gamma", "must be in (0, 1)");
  Check(c.tau > 0 && c.tau <= 1, "tau", "must be in (0, 1]");
  Check(c.replay_capacity >= c.batch_size, "replay_capacity", "must be >= batch_size");
  Check(c.warmup_steps >= 0, "warmup_steps", "must be non-negative");
  Check(c.episodes >= 0, "episodes", "must be non-negative");
  Check(c.updates_per_step >= 0, "updates_per_step", "must be non-negative");
  Check(c.eval_every > 0, "eval_every", "must be positive");
  Check(c.eval_episodes > 0, "eval_episodes", "must be positive");
}

SacAgent::SacAgent(const SacConfig& cfg, SeededRng& rng)
    : cfg_(cfg),
      policy_(rng, cfg.policy_hidden),
      q1_(Dims(kObsDim + kActDim, cfg.q_hidden, 1), Activation::kRelu, rng, "q1"),
      q2_(Dims(kObsDim + kActDim, cfg.q_hidden, 1), Activation::kRelu, rng, "q2"),
      q1_target_(q1_),
      q2_target_(q2_),
      log_alpha_("log_alpha", Matrix::Zero(1, 1)) {
  ValidateSacConfig(cfg_);
  pi_opt_ = Adam(policy_.net().Parameters(), AdamConfig{cfg_.lr_pi});
  std::vector<Parameter*> qp = q1_.Parameters();
  for (Parameter* p : q2_.Parameters()) qp.push_back(p);
  q_opt_ = Adam(qp, AdamConfig{cfg_.lr_q});
  alpha_opt_ = Adam({&log_alpha_}, AdamConfig{cfg_.lr_alpha});
}

double SacAgent::alpha() const { return std::exp(log_alpha_.value(0, 0)); }

Matrix SacAgent::QValues(const DenseNet& q, const Matrix& obs, const Matrix& act) const {
  return q.ForwardBatch(QInput(obs, act));
}

Vector SacAgent::QTarget(const Batch& b, const Matrix& next_noise) const {
  const Matrix out = policy_.net().ForwardBatch(ScaleObservations(b.next_obs));
  const Matrix mean = out.leftCols(kActDim);
  const Matrix log_std = out.rightCols(kActDim).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  const Matrix u = mean.array() + log_std.array().exp() * next_noise.array();
  const Matrix a = u.array().tanh();
  const Vector log_prob =
      (-0.5 * next_noise.array().square() - log_std.array() - kHalfLog2Pi)
          .rowwise()
          .sum()
          .matrix() -
      (1.0 - a.array().square() + kSquashEps).log().rowwise().sum().matrix();
  const Matrix in = QInput(b.next_obs, a);
  const Vector q_min = q1_target_.ForwardBatch(in).cwiseMin(q2_target_.ForwardBatch(in));
  const Vector soft = q_min - alpha() * log_prob;
  return b.rew.array() + cfg_.gamma * (1.0 - b.done.array()) * soft.array();
}

Var SacAgent::QLoss(Tape& tape, const Batch& b, const Vector& target) {
  Var in = tape.Constant(QInput(b.obs, b.act));
  Var y = tape.Constant(target);
  Var l1 = ad::Mean(ad::Square(ad::Sub(q1_.Forward(tape, in), y)));
  Var l2 = ad::Mean(ad::Square(ad::Sub(q2_.Forward(tape, in), y)));
  return ad::Add(l1, l2);
}

Var SacAgent::PolicyLoss(Tape& tape, const Batch& b, const Matrix& noise,
                         Vector* log_prob) {
  Policy::TapeOutput po = policy_.Forward(tape, b.obs, noise);
  Var in = ad::ConcatCols(tape.Constant(ScaleObservations(b.obs)), po.action);
  Var q_min = ad::Minimum(q1_.Forward(tape, in, false), q2_.Forward(tape, in, false));
  if (log_prob) *log_prob = po.log_prob.value();
  return ad::Mean(ad::Sub(ad::Scale(po.log_prob, alpha()), q_min));
}

Var SacAgent::AlphaLoss(Tape& tape, const Vector& log_prob) {
  Var la = tape.Param(log_alpha_);
  Var gap = tape.Constant(log_prob.array() + cfg_.target_entropy);
  return ad::Neg(ad::Mean(ad::Mul(la, gap)));
}

SacLosses SacAgent::UpdateOnBatch(const Batch& b, SeededRng& rng) {
  const Matrix pi_noise = GaussianMatrix(b.size(), kActDim, rng);
  const Matrix next_noise = GaussianMatrix(b.size(), kActDim, rng);
  SacLosses out;
  out.alpha = alpha();

  const Vector target = QTarget(b, next_noise);

  policy_.net().ZeroGrad();
  Vector log_prob;
  {
    Tape tape;
    Var loss = PolicyLoss(tape, b, pi_noise, &log_prob);
    out.loss_pi = loss.value()(0, 0);
    tape.Backward(loss);
  }
  log_alpha_.ZeroGrad();
  {
    Tape tape;
    tape.Backward(AlphaLoss(tape, log_prob));
  }
  q_opt_.ZeroGrad();
  {
    Tape tape;
    Var loss = QLoss(tape, b, target);
    out.loss_q = loss.value()(0, 0);
    tape.Backward(loss);
  }
  pi_opt_.Step();
  alpha_opt_.Step();
  q_opt_.Step();
  PolyakUpdate(q1_, q1_target_, cfg_.tau);
  PolyakUpdate(q2_, q2_target_, cfg_.tau);
  return out;
}

SacLosses SacAgent::Update(const ReplayBuffer& buffer, SeededRng& rng) {
  if (buffer.size() < cfg_.batch_size) {
    throw UsageError("SacAgent::Update: buffer holds " + std::to_string(buffer.size()) +
                     " transitions, batch needs " + std::to_string(cfg_.batch_size));
  }
  return UpdateOnBatch(buffer.Sample(cfg_.batch_size, rng), rng);
}

EvalResult Evaluate(PivotEnv& env, const ObjectSpec& spec, const ActorFn& actor,
                    int episodes, SeededRng& rng) {
  if (episodes <= 0) throw InvalidInput("Evaluate: episodes must be positive");
  EvalResult r;
  for (int i = 0; i < episodes; ++i) {
    const Trajectory t = CollectEpisode(env, spec, rng, actor);
    r.mean_return += t.Return();
    r.success_rate += t.success ? 1.0 : 0.0;
  }
  r.mean_return /= episodes;
  r.success_rate /= episodes;
  return r;
}

TrainResult TrainUnitary(const SacConfig& cfg, const EnvConfig& env_cfg,
                         std::uint64_t seed,
                         const std::function<void(const CurveRow&)>& progress) {
  ValidateSacConfig(cfg);
  const SeededRng root(seed);
  SeededRng init_rng = root.Split(1), env_rng = root.Split(2), act_rng = root.Split(3),
            update_rng = root.Split(4);
  const SeededRng eval_seed = root.Split(5);

  SacAgent agent(cfg, init_rng);
  ReplayBuffer buffer(cfg.replay_capacity);
  PivotEnv env(env_cfg);
  const ObjectSpec unitary = UnitaryObject();
  TrainResult result;

  std::int64_t steps = 0;
  double credit = 0.0, sum_q = 0.0, sum_pi = 0.0, sum_alpha = 0.0;
  int n_updates = 0;
  auto evaluate = [&](int episode) {
    SeededRng eval_rng = eval_seed;
    PivotEnv eval_env(env_cfg);
    const EvalResult e = Evaluate(
        eval_env, unitary,
        [&](const Observation& s) { return agent.policy().Deterministic(s); },
        cfg.eval_episodes, eval_rng);
    CurveRow row{episode, steps, e.mean_return, e.success_rate,
                 n_updates ? sum_q / n_updates : 0.0, n_updates ? sum_pi / n_updates : 0.0,
                 n_updates ? sum_alpha / n_updates : agent.alpha()};
    sum_q = sum_pi = sum_alpha = 0.0;
    n_updates = 0;
    result.curve.push_back(row);
    if (progress) progress(row);
  };

  evaluate(0);
  for (int ep = 1; ep <= cfg.episodes; ++ep) {
    Observation obs = env.Reset(unitary, env_rng);
    for (bool done = false; !done;) {
      Action a;
      if (steps < cfg.warmup_steps) {
        for (int i = 0; i < kActDim; ++i) a(i) = SampleUniform(act_rng, -1.0, 1.0);
      } else {
        a = agent.policy().Sample(obs, act_rng);
      }
      const StepResult r = env.Step(a);
      buffer.Add(Transition{obs, a, r.reward, r.obs, false});
      obs = r.obs;
      done = r.done;
      ++steps;
      if (steps >= cfg.warmup_steps && buffer.size() >= cfg.batch_size) {
        credit += cfg.updates_per_step;
        while (credit >= 1.0) {
          const SacLosses l = agent.Update(buffer, update_rng);
          sum_q += l.loss_q;
          sum_pi += l.loss_pi;
          sum_alpha += l.alpha;
          ++n_updates;
          credit -= 1.0;
        }
      }
    }
    if (ep % cfg.eval_every == 0) evaluate(ep);
  }
  result.policy = agent.policy();
  QuantizeToFloat(result.policy.net());
  return result;
}

}  // namespace pivot
