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

#include "pivot/adapt.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pivot/encoder.h"
#include "pivot/errors.h"

namespace pivot {
namespace {

constexpr int kStateHidden = 16;
constexpr int kActionHidden = 35;

bool HasDiagonalState(AdaptMode m) {
  return m == AdaptMode::kFull || m == AdaptMode::kNoAction;
}

bool HasDiagonalAction(AdaptMode m) {
  return m == AdaptMode::kFull || m == AdaptMode::kNoState;
}

DiagonalTransform Identity(int n) { return DiagonalTransform{Vector::Ones(n), 0.0}; }

Vector Concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

// Activations of every layer but the last.
Matrix TrunkActivations(const DenseNet& net, const Matrix& x) {
  Matrix h = x;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Matrix z = h * layers[l].weight.value;
    z.rowwise() += layers[l].bias.value.row(0);
    if (layers[l].activation == Activation::kRelu) {
      h = z.cwiseMax(0.0);
    } else if (layers[l].activation == Activation::kTanh) {
      h = z.array().tanh().matrix();
    } else {
      h = z;
    }
  }
  return h;
}

struct SurrogateData {
  Matrix inputs, values;
  Vector old_log_prob, advantage;
  Eigen::Index rows() const { return inputs.rows(); }
};

double Ascend(const std::function<Var(Tape&)>& objective, Adam& opt) {
  Tape tape;
  Var obj = objective(tape);
  Var loss = ad::Neg(obj);
  opt.ZeroGrad();
  tape.Backward(loss);
  opt.Step();
  return loss.value()(0, 0);
}

}  // namespace

const char* AdaptModeName(AdaptMode m) {
  switch (m) {
    case AdaptMode::kFull: return "full";
    case AdaptMode::kNoState: return "no_state";
    case AdaptMode::kNoAction: return "no_action";
    case AdaptMode::kFinetune: return "finetune";
    case AdaptMode::kNnProjection: return "nn_projection";
  }
  return "?";
}

AdaptMode ParseAdaptMode(const std::string& name) {
  for (AdaptMode m : {AdaptMode::kFull, AdaptMode::kNoState, AdaptMode::kNoAction,
                      AdaptMode::kFinetune, AdaptMode::kNnProjection}) {
    if (name == AdaptModeName(m)) return m;
  }
  throw InvalidInput("unknown adaptation mode '" + name +
                     "' (expected full, no_state, no_action, finetune or nn_projection)");
}

const char* ClipFormName(ClipForm c) { return c == ClipForm::kPaper ? "paper" : "standard"; }

ClipForm ParseClipForm(const std::string& name) {
  if (name == "paper") return ClipForm::kPaper;
  if (name == "standard") return ClipForm::kStandard;
  throw InvalidInput("unknown ppo_clip form '" + name + "' (expected paper or standard)");
}

Observation ProjectState(const Observation& s, const Vector& ts) {
  if (ts.size() != kStateProjDim) {
    throw InvalidInput("ProjectState: T_s needs 3 entries, got " + std::to_string(ts.size()));
  }
  Observation out = s;
  for (int i = 0; i < kStateProjDim; ++i) {
    out(obs_index::kObjectPos + i) = ts(i) * s(obs_index::kObjectPos + i);
    out(obs_index::kGripperPos + i) = ts(i) * s(obs_index::kGripperPos + i);
  }
  return out;
}

ProjectionNet::ProjectionNet(int input_dim, int hidden, int output_dim, bool identity_init,
                             SeededRng& rng, const std::string& name)
    : net_({input_dim, hidden, hidden, 2 * output_dim}, Activation::kRelu, rng, name),
      out_dim_(output_dim),
      identity_offset_(identity_init) {
  DenseLayer& last = net_.layers().back();
  if (identity_init) {
    last.weight.value.setZero();
    last.bias.value.setZero();
  } else {
    last.weight.value.rightCols(output_dim).setZero();
  }
  last.bias.value.rightCols(output_dim).setConstant(kProjectionInitLogStd);
}

GaussianHead ProjectionNet::Head(const Vector& input) const {
  const Vector out = net_.Forward(input);
  Vector mean = out.head(out_dim_);
  if (identity_offset_) mean.array() += 1.0;
  return GaussianHead(mean, out.tail(out_dim_));
}

DiagonalTransform ProjectionNet::Sample(const Vector& input, SeededRng& rng) const {
  const GaussianHead h = Head(input);
  Vector v(out_dim_);
  for (int i = 0; i < out_dim_; ++i) {
    v(i) = h.mean(i) + std::exp(h.log_std(i)) * rng.NextGaussian();
  }
  return DiagonalTransform{v, GaussianLogProb(h, v)};
}

DiagonalTransform ProjectionNet::Mean(const Vector& input) const {
  const GaussianHead h = Head(input);
  return DiagonalTransform{h.mean, GaussianLogProb(h, h.mean)};
}

double ProjectionNet::LogProb(const Vector& input, const Vector& value) const {
  return GaussianLogProb(Head(input), value);
}

Var ProjectionNet::LogProb(Tape& tape, const Matrix& inputs, const Matrix& values) {
  Var out = net_.Forward(tape, tape.Constant(inputs));
  Var mean = ad::SliceCols(out, 0, out_dim_);
  if (identity_offset_) mean = ad::AddScalar(mean, 1.0);
  Var log_std = ad::Clamp(ad::SliceCols(out, out_dim_, out_dim_), kLogStdMin, kLogStdMax);
  return ad::GaussianLogProb(tape.Constant(values), mean, log_std);
}

Vector StateNetInput(const Vector& feature) { return feature; }

Vector ActionNetInput(const Vector& feature, const Observation& s_bar) {
  return Concat(feature, s_bar.cwiseProduct(ObservationScale()));
}

Vector NnStateInput(const Vector& feature, const Observation& s) {
  return Concat(feature, s.cwiseProduct(ObservationScale()));
}

double AdaptTrajectory::Return() const {
  double r = 0.0;
  for (const AdaptStep& s : steps) r += s.r;
  return r;
}

Advantages ComputeAdvantages(const std::vector<double>& rewards, double gamma) {
  if (rewards.empty()) throw InvalidInput("ComputeAdvantages: empty trajectory");
  const std::size_t n = rewards.size();
  Advantages adv;
  adv.a_a.assign(n, 0.0);
  std::vector<double> discounted(n);
  double g = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    discounted[i] = g * rewards[i];
    g *= gamma;
  }
  double tail = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    tail += discounted[i];
    adv.a_a[i] = tail;
  }
  double total = 0.0;
  for (double d : discounted) total += d;
  adv.a_s = total / static_cast<double>(n);
  return adv;
}

Advantages ComputeAdvantages(const AdaptTrajectory& tau, double gamma) {
  std::vector<double> r;
  r.reserve(tau.steps.size());
  for (const AdaptStep& s : tau.steps) r.push_back(s.r);
  return ComputeAdvantages(r, gamma);
}

void StandardizeAdvantages(std::vector<Advantages>& adv) {
  if (adv.empty()) return;
  auto standardize = [](const std::vector<double*>& xs) {
    if (xs.size() < 2) return;
    double mean = 0.0;
    for (double* x : xs) mean += *x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double* x : xs) var += (*x - mean) * (*x - mean);
    const double sd = std::sqrt(var / static_cast<double>(xs.size()));
    for (double* x : xs) *x = sd > 0 ? (*x - mean) / sd : *x - mean;
  };
  std::vector<double*> s, a;
  for (Advantages& x : adv) {
    s.push_back(&x.a_s);
    for (double& v : x.a_a) a.push_back(&v);
  }
  standardize(s);
  standardize(a);
}

double ClippedSurrogate(double ratio, double advantage, double eps, ClipForm form) {
  if (!(ratio > 0)) throw InvalidInput("ClippedSurrogate: ratio must be positive");
  if (!(eps > 0 && eps < 1)) throw InvalidInput("ClippedSurrogate: eps must be in (0, 1)");
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  if (form == ClipForm::kPaper) return std::min(ratio, clipped) * advantage;
  return std::min(ratio * advantage, clipped * advantage);
}

Var ClippedSurrogate(Var ratio, const Vector& advantage, double eps, ClipForm form) {
  Tape& t = *ratio.tape();
  Var a = t.Constant(advantage);
  Var clipped = ad::Clamp(ratio, 1.0 - eps, 1.0 + eps);
  if (form == ClipForm::kPaper) return ad::Mul(ad::Minimum(ratio, clipped), a);
  return ad::Minimum(ad::Mul(ratio, a), ad::Mul(clipped, a));
}

Var ProjectionObjective(Tape& tape, ProjectionNet& net, const Matrix& inputs,
                        const Matrix& values, const Vector& old_log_prob,
                        const Vector& advantage, double eps, ClipForm form) {
  Var logp = net.LogProb(tape, inputs, values);
  Var ratio = ad::Exp(ad::Sub(logp, tape.Constant(old_log_prob)));
  return ad::Mean(ClippedSurrogate(ratio, advantage, eps, form));
}

Adapter::Adapter(const Policy& unitary, AdaptMode mode, SeededRng& rng)
    : mode_(mode), unitary_(unitary) {
  if (mode == AdaptMode::kNnProjection) {
    state_net_ = ProjectionNet(kFeatureDim + kObsDim, kStateHidden, kObsDim, false, rng,
                               "nn_state");
    action_net_ = ProjectionNet(kFeatureDim + kObsDim, kActionHidden, kActDim, false, rng,
                                "nn_action");
  } else {
    state_net_ = ProjectionNet(kFeatureDim, kStateHidden, kStateProjDim, true, rng, "state");
    action_net_ = ProjectionNet(kFeatureDim + kObsDim, kActionHidden, kActionProjDim, true,
                                rng, "action");
  }
  if (mode == AdaptMode::kFinetune) finetuned_ = unitary;
}

std::vector<Parameter*> Adapter::StateParameters() {
  if (HasDiagonalState(mode_) || mode_ == AdaptMode::kNnProjection) {
    return state_net_.net().Parameters();
  }
  return {};
}

std::vector<Parameter*> Adapter::ActionParameters() {
  if (HasDiagonalAction(mode_) || mode_ == AdaptMode::kNnProjection) {
    return action_net_.net().Parameters();
  }
  if (mode_ == AdaptMode::kFinetune) {
    DenseLayer& head = finetuned_.net().layers().back();
    return {&head.weight, &head.bias};
  }
  return {};
}

DiagonalTransform Adapter::StateTransform(const Vector& feature, ActMode act,
                                          SeededRng& rng) const {
  if (!HasDiagonalState(mode_)) return Identity(kStateProjDim);
  const Vector in = StateNetInput(feature);
  return act == ActMode::kStochastic ? state_net_.Sample(in, rng) : state_net_.Mean(in);
}

AdaptStep Adapter::Act(const Observation& s, const Vector& feature,
                       const DiagonalTransform& ts, ActMode act, SeededRng& rng,
                       bool force_identity) const {
  AdaptStep step;
  step.s = s;
  const bool stochastic = act == ActMode::kStochastic;
  if (mode_ == AdaptMode::kNnProjection && !force_identity) {
    const Vector sin = NnStateInput(feature, s);
    step.s_bar_sample = stochastic ? state_net_.Sample(sin, rng) : state_net_.Mean(sin);
    step.s_bar = step.s_bar_sample.diag;
    const Vector ain = ActionNetInput(feature, step.s_bar);
    step.ta = stochastic ? action_net_.Sample(ain, rng) : action_net_.Mean(ain);
    step.a = step.ta.diag.cwiseMax(-1.0).cwiseMin(1.0);
    return step;
  }
  step.s_bar = force_identity ? s : ProjectState(s, ts.diag);
  const Policy& pi = mode_ == AdaptMode::kFinetune ? finetuned_ : unitary_;
  const GaussianHead head = pi.Head(step.s_bar);
  if (stochastic) {
    for (int i = 0; i < kActDim; ++i) {
      step.u(i) = head.mean(i) + std::exp(head.log_std(i)) * rng.NextGaussian();
    }
  } else {
    step.u = head.mean;
  }
  step.u_log_prob = GaussianLogProb(head, step.u);
  step.a_bar = step.u.array().tanh().matrix();
  if (HasDiagonalAction(mode_) && !force_identity) {
    const Vector ain = ActionNetInput(feature, step.s_bar);
    step.ta = stochastic ? action_net_.Sample(ain, rng) : action_net_.Mean(ain);
  } else {
    step.ta = Identity(kActionProjDim);
  }
  step.a = step.ta.diag.cwiseProduct(step.a_bar).cwiseMax(-1.0).cwiseMin(1.0);
  return step;
}

AdaptTrajectory CollectAdaptEpisode(PivotEnv& env, const ObjectSpec& spec, int object,
                                    const Vector& feature, const Adapter& adapter,
                                    ActMode act, SeededRng& env_rng, SeededRng& act_rng,
                                    bool force_identity) {
  AdaptTrajectory tau;
  tau.object = object;
  tau.feature = feature;
  Observation obs = env.Reset(spec, env_rng);
  tau.ts = force_identity ? Identity(kStateProjDim)
                          : adapter.StateTransform(feature, act, act_rng);
  for (;;) {
    AdaptStep step = adapter.Act(obs, feature, tau.ts, act, act_rng, force_identity);
    const StepResult r = env.Step(step.a);
    step.r = r.reward;
    step.object_xz = Vec2(r.info.object.x, r.info.object.z);
    tau.steps.push_back(std::move(step));
    obs = r.obs;
    if (r.done) break;
  }
  tau.success = env.succeeded();
  return tau;
}

void ValidateAdaptConfig(const AdaptConfig& c) {
  auto req = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string("adapt.") + field + " " + what);
  };
  req(c.iterations >= 0, "iterations", "must be non-negative");
  req(c.episodes_per_iteration > 0, "episodes_per_iteration", "must be positive");
  req(c.epochs > 0, "epochs", "must be positive");
  req(c.gamma > 0 && c.gamma <= 1, "gamma", "must be in (0, 1]");
  req(c.clip_state > 0 && c.clip_state < 1, "clip_state", "must be in (0, 1)");
  req(c.clip_action > 0 && c.clip_action < 1, "clip_action", "must be in (0, 1)");
  req(c.lr_state > 0, "lr_state", "must be positive");
  req(c.lr_action > 0, "lr_action", "must be positive");
  req(c.eval_trials > 0, "eval_trials", "must be positive");
}

UpdateStats UpdateProjections(Adapter& adapter, const std::vector<AdaptTrajectory>& batch,
                              const AdaptConfig& cfg, Adam& state_opt, Adam& action_opt) {
  if (batch.empty()) throw InvalidInput("UpdateProjections: empty batch");
  std::vector<Advantages> adv;
  adv.reserve(batch.size());
  for (const AdaptTrajectory& t : batch) adv.push_back(ComputeAdvantages(t, cfg.gamma));
  StandardizeAdvantages(adv);

  const AdaptMode mode = adapter.mode();
  Eigen::Index n_steps = 0;
  for (const AdaptTrajectory& t : batch) n_steps += static_cast<Eigen::Index>(t.steps.size());
  const auto n_eps = static_cast<Eigen::Index>(batch.size());

  SurrogateData sd, ad_;
  if (HasDiagonalState(mode)) {
    sd = {Matrix(n_eps, kFeatureDim), Matrix(n_eps, kStateProjDim), Vector(n_eps),
          Vector(n_eps)};
    for (Eigen::Index e = 0; e < n_eps; ++e) {
      const AdaptTrajectory& t = batch[static_cast<std::size_t>(e)];
      sd.inputs.row(e) = StateNetInput(t.feature).transpose();
      sd.values.row(e) = t.ts.diag.transpose();
      sd.old_log_prob(e) = t.ts.log_prob;
      sd.advantage(e) = adv[static_cast<std::size_t>(e)].a_s;
    }
  } else if (mode == AdaptMode::kNnProjection) {
    sd = {Matrix(n_steps, kFeatureDim + kObsDim), Matrix(n_steps, kObsDim), Vector(n_steps),
          Vector(n_steps)};
  }
  const bool action_net = HasDiagonalAction(mode) || mode == AdaptMode::kNnProjection;
  if (action_net) {
    ad_ = {Matrix(n_steps, kFeatureDim + kObsDim), Matrix(n_steps, kActDim), Vector(n_steps),
           Vector(n_steps)};
  } else if (mode == AdaptMode::kFinetune) {
    ad_ = {Matrix(n_steps, kObsDim), Matrix(n_steps, kActDim), Vector(n_steps),
           Vector(n_steps)};
  }
  Eigen::Index k = 0;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const AdaptTrajectory& t = batch[e];
    for (std::size_t i = 0; i < t.steps.size(); ++i, ++k) {
      const AdaptStep& st = t.steps[i];
      if (mode == AdaptMode::kNnProjection) {
        sd.inputs.row(k) = NnStateInput(t.feature, st.s).transpose();
        sd.values.row(k) = st.s_bar_sample.diag.transpose();
        sd.old_log_prob(k) = st.s_bar_sample.log_prob;
        sd.advantage(k) = adv[e].a_s;
      }
      if (action_net) {
        ad_.inputs.row(k) = ActionNetInput(t.feature, st.s_bar).transpose();
        ad_.values.row(k) = st.ta.diag.transpose();
        ad_.old_log_prob(k) = st.ta.log_prob;
        ad_.advantage(k) = adv[e].a_a[i];
      } else if (mode == AdaptMode::kFinetune) {
        ad_.inputs.row(k) = st.s_bar.transpose();
        ad_.values.row(k) = st.u.transpose();
        ad_.old_log_prob(k) = st.u_log_prob;
        ad_.advantage(k) = adv[e].a_a[i];
      }
    }
  }

  Matrix trunk;
  if (mode == AdaptMode::kFinetune) {
    trunk = TrunkActivations(adapter.finetuned().net(), ScaleObservations(ad_.inputs));
  }

  UpdateStats stats;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (sd.rows() > 0) {
      stats.state_loss = Ascend(
          [&](Tape& tape) {
            return ProjectionObjective(tape, adapter.state_net(), sd.inputs, sd.values,
                                       sd.old_log_prob, sd.advantage, cfg.clip_state,
                                       cfg.clip_form);
          },
          state_opt);
    }
    if (ad_.rows() > 0) {
      stats.action_loss = Ascend(
          [&](Tape& tape) {
            if (mode != AdaptMode::kFinetune) {
              return ProjectionObjective(tape, adapter.action_net(), ad_.inputs, ad_.values,
                                         ad_.old_log_prob, ad_.advantage, cfg.clip_action,
                                         cfg.clip_form);
            }
            DenseLayer& head = adapter.finetuned().net().layers().back();
            Var out = ad::Linear(tape.Constant(trunk), tape.Param(head.weight),
                                 tape.Param(head.bias));
            Var mean = ad::SliceCols(out, 0, kActDim);
            Var log_std =
                ad::Clamp(ad::SliceCols(out, kActDim, kActDim), kLogStdMin, kLogStdMax);
            Var logp = ad::GaussianLogProb(tape.Constant(ad_.values), mean, log_std);
            Var ratio = ad::Exp(ad::Sub(logp, tape.Constant(ad_.old_log_prob)));
            return ad::Mean(ClippedSurrogate(ratio, ad_.advantage, cfg.clip_action,
                                             cfg.clip_form));
          },
          action_opt);
    }
  }
  return stats;
}

double PoolEval::SuccessRate() const {
  if (successes.empty() || trials <= 0) return 0.0;
  int total = 0;
  for (int s : successes) total += s;
  return static_cast<double>(total) / (static_cast<double>(successes.size()) * trials);
}

PoolEval EvaluatePool(const Adapter& adapter, const std::vector<ObjectSpec>& pool,
                      const std::vector<Vector>& features, const EnvConfig& env_cfg,
                      int trials, SeededRng& rng, bool force_identity) {
  if (pool.size() != features.size()) throw InvalidInput("EvaluatePool: one feature per object");
  if (trials <= 0) throw InvalidInput("EvaluatePool: trials must be positive");
  PivotEnv env(env_cfg);
  PoolEval ev;
  ev.trials = trials;
  const SeededRng base(rng.NextU64());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    int ok = 0;
    for (int t = 0; t < trials; ++t) {
      SeededRng env_rng = base.Split(i).Split(static_cast<std::uint64_t>(t));
      SeededRng act_rng = env_rng.Split(1);
      ok += CollectAdaptEpisode(env, pool[i], static_cast<int>(i), features[i], adapter,
                                ActMode::kDeterministic, env_rng, act_rng, force_identity)
                .success;
    }
    ev.successes.push_back(ok);
  }
  return ev;
}

AdaptResult RunAlgorithm1(Adapter& adapter, const std::vector<ObjectSpec>& pool,
                          const std::vector<Vector>& features, const EnvConfig& env_cfg,
                          const AdaptConfig& cfg, SeededRng& rng,
                          const std::function<void(const AdaptCurveRow&)>& progress) {
  ValidateAdaptConfig(cfg);
  if (pool.empty() || pool.size() != features.size()) {
    throw InvalidInput("RunAlgorithm1: need a non-empty pool with one feature per object");
  }
  if (cfg.mode != adapter.mode()) throw InvalidInput("RunAlgorithm1: config and adapter modes differ");
  PivotEnv env(env_cfg);
  Adam state_opt(adapter.StateParameters(), AdamConfig{cfg.lr_state});
  Adam action_opt(adapter.ActionParameters(), AdamConfig{cfg.lr_action});
  const SeededRng base(rng.NextU64());
  // Every iteration is evaluated on the same initial conditions.
  const SeededRng eval_base = base.Split(kPoolEvalStream);
  AdaptResult result;
  for (int it = 0; it < cfg.iterations; ++it) {
    const SeededRng it_rng = base.Split(static_cast<std::uint64_t>(it));
    SeededRng env_rng = it_rng.Split(1), act_rng = it_rng.Split(2), obj_rng = it_rng.Split(3);
    std::vector<AdaptTrajectory> batch;
    batch.reserve(static_cast<std::size_t>(cfg.episodes_per_iteration));
    AdaptCurveRow row;
    row.iteration = it;
    SeededRng eval_rng = eval_base;
    row.pool_success_rate =
        EvaluatePool(adapter, pool, features, env_cfg, cfg.eval_trials, eval_rng).SuccessRate();
    double ts_sum = 0.0, ta_sum = 0.0;
    long ta_n = 0;
    for (int k = 0; k < cfg.episodes_per_iteration; ++k) {
      const auto obj = static_cast<std::size_t>(obj_rng.NextBelow(pool.size()));
      batch.push_back(CollectAdaptEpisode(env, pool[obj], static_cast<int>(obj), features[obj],
                                          adapter, ActMode::kStochastic, env_rng, act_rng));
      const AdaptTrajectory& t = batch.back();
      row.mean_return += t.Return();
      ts_sum += t.ts.diag.mean();
      for (const AdaptStep& s : t.steps) {
        ta_sum += s.ta.diag.mean();
        ++ta_n;
      }
    }
    row.mean_return /= cfg.episodes_per_iteration;
    row.mean_ts_diag = ts_sum / cfg.episodes_per_iteration;
    row.mean_ta_diag = ta_n ? ta_sum / static_cast<double>(ta_n) : 1.0;
    const UpdateStats st = UpdateProjections(adapter, batch, cfg, state_opt, action_opt);
    row.state_loss = st.state_loss;
    row.action_loss = st.action_loss;
    result.curve.push_back(row);
    if (progress) progress(row);
  }
  return result;
}

double DtwDistance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.empty() || b.empty()) throw InvalidInput("DtwDistance: empty trajectory");
  const std::size_t n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double cost = (a[i - 1] - b[j - 1]).norm();
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double MeanPairwiseDtw(const std::vector<std::vector<Vec2>>& trajectories) {
  if (trajectories.size() < 2) throw InvalidInput("MeanPairwiseDtw: need two trajectories");
  double sum = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    for (std::size_t j = i + 1; j < trajectories.size(); ++j) {
      sum += DtwDistance(trajectories[i], trajectories[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

ProjectedTraces TraceTrajectories(const Adapter& adapter, const std::vector<ObjectSpec>& pool,
                                  const std::vector<Vector>& features,
                                  const EnvConfig& env_cfg, SeededRng& rng) {
  if (pool.size() != features.size()) {
    throw InvalidInput("TraceTrajectories: one feature per object");
  }
  PivotEnv env(env_cfg);
  ProjectedTraces out;
  const SeededRng base(rng.NextU64());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    SeededRng env_rng = base.Split(i);
    SeededRng act_rng = env_rng.Split(1);
    const AdaptTrajectory t = CollectAdaptEpisode(env, pool[i], static_cast<int>(i), features[i],
                                                  adapter, ActMode::kDeterministic, env_rng,
                                                  act_rng);
    std::vector<Vec2> raw, proj;
    for (const AdaptStep& s : t.steps) {
      raw.push_back(s.object_xz);
      proj.emplace_back(t.ts.diag(0) * s.object_xz.x(), t.ts.diag(2) * s.object_xz.y());
    }
    out.raw.push_back(std::move(raw));
    out.projected.push_back(std::move(proj));
  }
  return out;
}

}  // namespace pivot
