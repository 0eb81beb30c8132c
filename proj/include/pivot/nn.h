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

#ifndef PIVOT_NN_H_
#define PIVOT_NN_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pivot/autodiff.h"
#include "pivot/rng.h"

namespace pivot {

enum class Activation { kRelu, kTanh, kLinear };

struct DenseLayer {
  Parameter weight;  // in x out
  Parameter bias;    // 1 x out
  Activation activation = Activation::kLinear;
};

// Fully connected network. Hidden layers use `hidden`, the last layer is
// always linear.
class DenseNet {
 public:
  DenseNet() = default;
  // dims = {input, hidden..., output}. Weights and biases are drawn from
  // U(-1/sqrt(in), 1/sqrt(in)).
  DenseNet(const std::vector<int>& dims, Activation hidden, SeededRng& rng,
           const std::string& name = "net");

  int input_dim() const { return dims_.empty() ? 0 : dims_.front(); }
  int output_dim() const { return dims_.empty() ? 0 : dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }

  // Throws InvalidInput on a dimension mismatch.
  Vector Forward(const Vector& x) const;
  Matrix ForwardBatch(const Matrix& x) const;
  // Records the forward pass. With trainable = false the weights enter the
  // tape as constants (gradients still flow to x).
  Var Forward(Tape& tape, Var x, bool trainable = true);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<Parameter*> Parameters();
  std::vector<const Parameter*> Parameters() const;
  std::size_t ParameterCount() const;
  void ZeroGrad();

 private:
  std::vector<int> dims_;
  std::vector<DenseLayer> layers_;
};

// target <- tau * source + (1 - tau) * target, parameter by parameter.
void PolyakUpdate(const DenseNet& source, DenseNet& target, double tau);

// Rounds every parameter to the nearest 32-bit float, the precision used on
// disk, so an in-memory net behaves exactly like its reloaded checkpoint.
void QuantizeToFloat(DenseNet& net);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam over a fixed parameter list. Moments mirror parameter shapes.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Parameter*> params, AdamConfig config);

  // Applies one update from each parameter's grad. Throws InvalidInput when a
  // parameter or its gradient no longer matches the recorded shapes.
  void Step();
  void ZeroGrad();

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamConfig config_;
  std::int64_t step_ = 0;
};

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian with log-std clamped to [kLogStdMin, kLogStdMax].
struct GaussianHead {
  GaussianHead(Vector mean_in, Vector log_std_in);
  Vector mean;
  Vector log_std;
  Vector Std() const { return log_std.array().exp().matrix(); }
};

struct GaussianSample {
  Vector value;
  double log_prob = 0.0;
};

double GaussianLogProb(const GaussianHead& head, const Vector& x);
// mean + std * eps with eps ~ N(0, I) drawn from rng.
GaussianSample RSample(const GaussianHead& head, SeededRng& rng);
// tanh(u) with log_prob - sum(log(1 - tanh(u)^2 + 1e-6)).
GaussianSample TanhSquash(const GaussianSample& u);

// Sum_i 0.5 (mean_i^2 + std_i^2 - 1 - 2 ln std_i). Throws when any std <= 0.
double KlDiagGaussian(const Vector& mean, const Vector& std);

namespace ad {
// Reparameterized sample mean + exp(log_std) * noise, noise held constant.
Var RSample(Var mean, Var log_std, const Matrix& noise);
// Row-wise tanh-squash log-density correction: sum(log(1 - tanh(u)^2 + 1e-6)).
Var TanhLogDetJacobian(Var u);
}  // namespace ad

}  // namespace pivot

#endif  // PIVOT_NN_H_
