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

#include <gtest/gtest.h>

#include "grad_check.h"
#include "pivot/errors.h"

namespace pivot {
namespace {

SacConfig SmallConfig(int batch = 32) {
  SacConfig c;
  c.batch_size = batch;
  c.policy_hidden = {16, 16};
  c.q_hidden = {24, 24};
  c.replay_capacity = 1000;
  return c;
}

Batch RandomBatch(int n, SeededRng& rng, double done_prob = 0.0) {
  Batch b{Matrix(n, kObsDim), Matrix(n, kActDim), Matrix(n, kObsDim), Vector(n), Vector(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kObsDim; ++j) {
      b.obs(i, j) = SampleGaussian(rng, 0.0, 0.1);
      b.next_obs(i, j) = SampleGaussian(rng, 0.0, 0.1);
    }
    for (int j = 0; j < kActDim; ++j) b.act(i, j) = SampleUniform(rng, -1.0, 1.0);
    b.rew(i) = SampleUniform(rng, 0.0, 1.5);
    b.done(i) = rng.NextDouble() < done_prob ? 1.0 : 0.0;
  }
  return b;
}

Matrix Noise(int n, SeededRng& rng) {
  Matrix m(n, kActDim);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = rng.NextGaussian();
  return m;
}

// Row-wise oracle for the squashed-Gaussian log density.
double SquashedLogProb(const Vector& mean, const Vector& log_std, const Vector& eps) {
  double lp = 0.0;
  for (int j = 0; j < kActDim; ++j) {
    const double ls = std::clamp(log_std(j), kLogStdMin, kLogStdMax);
    const double u = mean(j) + std::exp(ls) * eps(j);
    const double a = std::tanh(u);
    lp += -0.5 * eps(j) * eps(j) - ls - 0.5 * std::log(2 * kPi);
    lp -= std::log(1.0 - a * a + 1e-6);
  }
  return lp;
}

TEST(ObservationScaleTest, ScalesOnlyPositions) {
  const Vector& s = ObservationScale();
  for (int i = 0; i < kObsDim; ++i) {
    const bool pos = (i < 3) || (i >= 7 && i < 10);
    EXPECT_EQ(s(i), pos ? 10.0 : 1.0) << i;
  }
  EXPECT_THROW(ScaleObservations(Matrix::Zero(2, 5)), InvalidInput);
}

TEST(PolicyTest, DeterministicIsTanhOfMean) {
  SeededRng rng(3);
  Policy pi(rng, {16, 16});
  Observation s = Observation::Random();
  const GaussianHead h = pi.Head(s);
  const Action a = pi.Deterministic(s);
  for (int j = 0; j < kActDim; ++j) EXPECT_DOUBLE_EQ(a(j), std::tanh(h.mean(j)));
  for (int k = 0; k < 100; ++k) {
    const Action x = pi.Sample(s, rng);
    EXPECT_TRUE((x.array().abs() < 1.0).all());
  }
}

TEST(PolicyTest, TapeLogProbMatchesOracle) {
  SeededRng rng(4);
  Policy pi(rng, {16, 16});
  const Matrix obs = Matrix::Random(6, kObsDim);
  const Matrix eps = Noise(6, rng);
  Tape tape;
  const Policy::TapeOutput out = pi.Forward(tape, obs, eps);
  const Matrix raw = pi.net().ForwardBatch(ScaleObservations(obs));
  for (int i = 0; i < 6; ++i) {
    const Vector mean = raw.row(i).head(kActDim).transpose();
    const Vector ls = raw.row(i).tail(kActDim).transpose();
    EXPECT_NEAR(out.log_prob.value()(i, 0),
                SquashedLogProb(mean, ls, eps.row(i).transpose()), 1e-9);
    for (int j = 0; j < kActDim; ++j) {
      const double ls_c = std::clamp(ls(j), kLogStdMin, kLogStdMax);
      EXPECT_NEAR(out.action.value()(i, j), std::tanh(mean(j) + std::exp(ls_c) * eps(i, j)),
                  1e-12);
    }
  }
}

TEST(CollectTest, HorizonOneGivesOneStep) {
  EnvConfig cfg;
  cfg.horizon = 1;
  PivotEnv env(cfg);
  SeededRng rng(5);
  const Trajectory t =
      CollectEpisode(env, UnitaryObject(), rng, [](const Observation&) { return Action::Zero(); });
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_FALSE(t.steps[0].terminal);
}

TEST(CollectTest, ReturnMatchesBackwardFold) {
  SeededRng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    Trajectory t;
    const int n = 1 + static_cast<int>(rng.NextBelow(30));
    for (int i = 0; i < n; ++i) {
      Transition s;
      s.reward = SampleUniform(rng, -1.0, 2.0);
      t.steps.push_back(s);
    }
    const double gamma = SampleUniform(rng, 0.5, 1.0);
    double g = 0.0;
    for (int i = n - 1; i >= 0; --i) g = t.steps[static_cast<std::size_t>(i)].reward + gamma * g;
    EXPECT_NEAR(t.Return(gamma), g, 1e-12);
  }
}

TEST(CollectTest, DeterministicModeIsBitReproducible) {
  SeededRng init(7);
  Policy pi(init, {16, 16});
  PivotEnv env{EnvConfig{}};
  SeededRng e1(8), e2(8), a1(9), a2(10);
  const Trajectory t1 = CollectEpisode(env, UnitaryObject(), e1, pi, ActMode::kDeterministic, a1);
  const Trajectory t2 = CollectEpisode(env, UnitaryObject(), e2, pi, ActMode::kDeterministic, a2);
  ASSERT_EQ(t1.steps.size(), t2.steps.size());
  for (std::size_t i = 0; i < t1.steps.size(); ++i) {
    EXPECT_EQ(t1.steps[i].action, t2.steps[i].action);
    EXPECT_EQ(t1.steps[i].next_obs, t2.steps[i].next_obs);
  }
}

TEST(ReplayBufferTest, OverwritesOldestAndStaysInRange) {
  ReplayBuffer buf(10);
  for (int i = 0; i < 25; ++i) {
    Transition t;
    t.obs.setZero();
    t.next_obs.setZero();
    t.action.setZero();
    t.reward = i;
    buf.Add(t);
    EXPECT_EQ(buf.size(), std::min(i + 1, 10));
  }
  SeededRng rng(11);
  for (int i : buf.SampleIndices(5000, rng)) {
    EXPECT_GE(i, 0);
    EXPECT_LT(i, buf.size());
  }
  const Batch b = buf.Sample(2000, rng);
  EXPECT_GE(b.rew.minCoeff(), 15.0);
  EXPECT_LE(b.rew.maxCoeff(), 24.0);
  EXPECT_THROW(buf.Gather({10}), InvalidInput);
  EXPECT_THROW(ReplayBuffer(4).SampleIndices(1, rng), UsageError);
}

TEST(SacTest, RejectsBadConfig) {
  SacConfig c;
  c.gamma = 1.0;
  EXPECT_THROW(ValidateSacConfig(c), ConfigError);
  c = SacConfig{};
  c.batch_size = 0;
  EXPECT_THROW(ValidateSacConfig(c), ConfigError);
  c = SacConfig{};
  c.replay_capacity = 10;
  EXPECT_THROW(ValidateSacConfig(c), ConfigError);
  EXPECT_NO_THROW(ValidateSacConfig(SacConfig{}));
}

TEST(SacTest, UpdateNeedsFullBatch) {
  SeededRng rng(12);
  SacAgent agent(SmallConfig(32), rng);
  ReplayBuffer buf(100);
  for (int i = 0; i < 31; ++i) {
    Transition t;
    t.obs.setZero();
    t.next_obs.setZero();
    t.action.setZero();
    buf.Add(t);
  }
  EXPECT_THROW(agent.Update(buf, rng), UsageError);
}

TEST(SacTest, TerminalTargetIsReward) {
  SeededRng rng(13);
  SacAgent agent(SmallConfig(), rng);
  Batch b = RandomBatch(32, rng);
  b.done.setOnes();
  const Vector y = agent.QTarget(b, Noise(32, rng));
  for (int i = 0; i < 32; ++i) EXPECT_EQ(y(i), b.rew(i));
}

TEST(SacTest, TargetMatchesRowOracle) {
  SeededRng rng(14);
  SacAgent agent(SmallConfig(), rng);
  const Batch b = RandomBatch(16, rng, 0.3);
  const Matrix eps = Noise(16, rng);
  const Vector y = agent.QTarget(b, eps);
  const double gamma = agent.config().gamma;
  for (int i = 0; i < 16; ++i) {
    Vector s = b.next_obs.row(i).transpose().cwiseProduct(ObservationScale());
    const Vector raw = agent.policy().net().Forward(s);
    const Vector mean = raw.head(kActDim), ls = raw.tail(kActDim);
    Vector in(kObsDim + kActDim);
    in.head(kObsDim) = s;
    for (int j = 0; j < kActDim; ++j) {
      in(kObsDim + j) =
          std::tanh(mean(j) + std::exp(std::clamp(ls(j), kLogStdMin, kLogStdMax)) * eps(i, j));
    }
    const double q = std::min(agent.q_target(0).Forward(in)(0), agent.q_target(1).Forward(in)(0));
    const double lp = SquashedLogProb(mean, ls, eps.row(i).transpose());
    const double oracle = b.rew(i) + gamma * (1.0 - b.done(i)) * (q - agent.alpha() * lp);
    EXPECT_NEAR(y(i), oracle, 1e-9);
  }
}

TEST(SacTest, PolicyLossUsesTwinMinimum) {
  SeededRng rng(15);
  SacAgent agent(SmallConfig(), rng);
  const Batch b = RandomBatch(32, rng);
  const Matrix eps = Noise(32, rng);
  Tape tape;
  Vector log_prob;
  const double loss = agent.PolicyLoss(tape, b, eps, &log_prob).value()(0, 0);

  Tape t2;
  const Matrix act = agent.policy().Forward(t2, b.obs, eps).action.value();
  const Matrix q1 = agent.QValues(agent.q(0), b.obs, act);
  const Matrix q2 = agent.QValues(agent.q(1), b.obs, act);
  double oracle = 0.0;
  for (int i = 0; i < 32; ++i) {
    const double m = std::min(q1(i, 0), q2(i, 0));
    EXPECT_LE(m, q1(i, 0));
    EXPECT_LE(m, q2(i, 0));
    oracle += agent.alpha() * log_prob(i) - m;
  }
  EXPECT_NEAR(loss, oracle / 32, 1e-10);
}

TEST(SacTest, PolyakIsExactAfterOneUpdate) {
  SeededRng rng(16);
  SacAgent agent(SmallConfig(), rng);
  // Make online and target differ first.
  for (int k = 0; k < 3; ++k) agent.UpdateOnBatch(RandomBatch(32, rng), rng);
  std::vector<Matrix> before;
  for (int q = 0; q < 2; ++q) {
    for (const Parameter* p : std::as_const(agent.q_target(q)).Parameters()) {
      before.push_back(p->value);
    }
  }
  agent.UpdateOnBatch(RandomBatch(32, rng), rng);
  const double tau = agent.config().tau;
  std::size_t k = 0;
  for (int q = 0; q < 2; ++q) {
    auto online = std::as_const(agent.q(q)).Parameters();
    auto target = std::as_const(agent.q_target(q)).Parameters();
    for (std::size_t i = 0; i < online.size(); ++i, ++k) {
      const Matrix expect = tau * online[i]->value + (1.0 - tau) * before[k];
      EXPECT_EQ(target[i]->value, expect);
      EXPECT_NE(target[i]->value, before[k]);
    }
  }
}

TEST(SacTest, BellmanResidualDecreasesOnFixedBatch) {
  SeededRng rng(17);
  SacAgent agent(SmallConfig(64), rng);
  const Batch b = RandomBatch(64, rng, 0.2);
  const Matrix eps = Noise(64, rng);
  auto residual = [&] {
    const Vector y = agent.QTarget(b, eps);
    const Matrix q1 = agent.QValues(agent.q(0), b.obs, b.act);
    return (q1.col(0) - y).squaredNorm() / 64;
  };
  const double start = residual();
  double prev_alpha = agent.alpha();
  for (int k = 0; k < 200; ++k) {
    const SacLosses l = agent.UpdateOnBatch(b, rng);
    EXPECT_GT(l.alpha, 0.0);
    EXPECT_TRUE(std::isfinite(l.loss_q) && std::isfinite(l.loss_pi));
    prev_alpha = agent.alpha();
    ASSERT_GT(prev_alpha, 0.0);
  }
  EXPECT_LT(residual(), 0.5 * start);
}

TEST(SacTest, UpdatesAreSeedDeterministic) {
  auto run = [] {
    SeededRng rng(18);
    SacAgent agent(SmallConfig(), rng);
    for (int k = 0; k < 5; ++k) agent.UpdateOnBatch(RandomBatch(32, rng), rng);
    std::vector<Matrix> out;
    for (const Parameter* p : std::as_const(agent.policy().net()).Parameters()) {
      out.push_back(p->value);
    }
    out.push_back(Matrix::Constant(1, 1, agent.log_alpha()));
    return out;
  };
  EXPECT_EQ(run(), run());
}

class SacGradTest : public ::testing::Test {
 protected:
  SacGradTest() : rng_(19), agent_(SmallConfig(4), rng_) {
    batch_ = RandomBatch(4, rng_, 0.25);
    eps_ = Noise(4, rng_);
  }
  SeededRng rng_;
  SacAgent agent_;
  Batch batch_;
  Matrix eps_;
};

TEST_F(SacGradTest, QLossGradient) {
  const Vector y = agent_.QTarget(batch_, eps_);
  std::vector<Parameter*> params = agent_.q(0).Parameters();
  for (Parameter* p : agent_.q(1).Parameters()) params.push_back(p);
  const double err = testing::MaxParamGradError(params, [&](bool backward) {
    Tape tape;
    Var l = agent_.QLoss(tape, batch_, y);
    if (backward) tape.Backward(l);
    return l.value()(0, 0);
  }, 1e-6);
  EXPECT_LT(err, 1e-3);
}

TEST_F(SacGradTest, PolicyLossGradient) {
  const double err = testing::MaxParamGradError(agent_.policy().net().Parameters(),
                                                [&](bool backward) {
    Tape tape;
    Var l = agent_.PolicyLoss(tape, batch_, eps_, nullptr);
    if (backward) tape.Backward(l);
    return l.value()(0, 0);
  }, 1e-6);
  EXPECT_LT(err, 1e-3);
  for (int q = 0; q < 2; ++q) {
    for (const Parameter* p : agent_.q(q).Parameters()) EXPECT_EQ(p->grad.norm(), 0.0);
  }
}

TEST_F(SacGradTest, AlphaLossGradient) {
  Vector log_prob;
  {
    Tape tape;
    agent_.PolicyLoss(tape, batch_, eps_, &log_prob);
  }
  const double err = testing::MaxParamGradError({&agent_.log_alpha_param()}, [&](bool backward) {
    Tape tape;
    Var l = agent_.AlphaLoss(tape, log_prob);
    if (backward) tape.Backward(l);
    return l.value()(0, 0);
  }, 1e-6);
  EXPECT_LT(err, 1e-3);
}

}  // namespace
}  // namespace pivot
