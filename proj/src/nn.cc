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

#include "pivot/nn.h"

#include <cmath>
#include <string>

#include "pivot/errors.h"

namespace pivot {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

Matrix Activate(Matrix x, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return x.cwiseMax(0.0);
    case Activation::kTanh:
      return x.array().tanh().matrix();
    case Activation::kLinear:
      return x;
  }
  return x;
}

}  // namespace

DenseNet::DenseNet(const std::vector<int>& dims, Activation hidden,
                   SeededRng& rng, const std::string& name)
    : dims_(dims) {
  if (dims.size() < 2) throw InvalidInput("DenseNet needs at least two dims");
  for (int d : dims) {
    if (d <= 0) throw InvalidInput("DenseNet dims must be positive");
  }
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Matrix w(in, out);
    for (Eigen::Index j = 0; j < out; ++j) {
      for (Eigen::Index i = 0; i < in; ++i) w(i, j) = SampleUniform(rng, -bound, bound);
    }
    Matrix b(1, out);
    for (Eigen::Index j = 0; j < out; ++j) b(0, j) = SampleUniform(rng, -bound, bound);
    const std::string prefix = name + "." + std::to_string(l);
    layers_.push_back(DenseLayer{Parameter(prefix + ".weight", std::move(w)),
                                 Parameter(prefix + ".bias", std::move(b)),
                                 l + 2 == dims.size() ? Activation::kLinear : hidden});
  }
}

Vector DenseNet::Forward(const Vector& x) const {
  if (x.size() != input_dim()) {
    throw InvalidInput("DenseNet::Forward: expected input dim " +
                       std::to_string(input_dim()) + ", got " +
                       std::to_string(x.size()));
  }
  Eigen::RowVectorXd h = x.transpose();
  for (const DenseLayer& layer : layers_) {
    Eigen::RowVectorXd z = h * layer.weight.value;
    z += layer.bias.value.row(0);
    h = Activate(z, layer.activation);
  }
  return h.transpose();
}

Matrix DenseNet::ForwardBatch(const Matrix& x) const {
  if (x.cols() != input_dim()) {
    throw InvalidInput("DenseNet::ForwardBatch: expected input dim " +
                       std::to_string(input_dim()) + ", got " +
                       std::to_string(x.cols()));
  }
  Matrix h = x;
  for (const DenseLayer& layer : layers_) {
    Matrix z = h * layer.weight.value;
    z.rowwise() += layer.bias.value.row(0);
    h = Activate(std::move(z), layer.activation);
  }
  return h;
}

Var DenseNet::Forward(Tape& tape, Var x, bool trainable) {
  if (x.cols() != input_dim()) {
    throw InvalidInput("DenseNet::Forward: expected input dim " +
                       std::to_string(input_dim()) + ", got " +
                       std::to_string(x.cols()));
  }
  Var h = x;
  for (DenseLayer& layer : layers_) {
    h = ad::Linear(h, tape.Param(layer.weight, trainable),
                   tape.Param(layer.bias, trainable));
    switch (layer.activation) {
      case Activation::kRelu:
        h = ad::Relu(h);
        break;
      case Activation::kTanh:
        h = ad::Tanh(h);
        break;
      case Activation::kLinear:
        break;
    }
  }
  return h;
}

std::vector<Parameter*> DenseNet::Parameters() {
  std::vector<Parameter*> out;
  for (DenseLayer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Parameter*> DenseNet::Parameters() const {
  std::vector<const Parameter*> out;
  for (const DenseLayer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::size_t DenseNet::ParameterCount() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) {
    n += static_cast<std::size_t>(l.weight.value.size() + l.bias.value.size());
  }
  return n;
}

void DenseNet::ZeroGrad() {
  for (Parameter* p : Parameters()) p->ZeroGrad();
}

void PolyakUpdate(const DenseNet& source, DenseNet& target, double tau) {
  auto src = source.Parameters();
  auto dst = target.Parameters();
  if (src.size() != dst.size()) throw InvalidInput("PolyakUpdate: nets differ");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i]->value.rows() != dst[i]->value.rows() ||
        src[i]->value.cols() != dst[i]->value.cols()) {
      throw InvalidInput("PolyakUpdate: parameter shapes differ");
    }
    dst[i]->value = tau * src[i]->value + (1.0 - tau) * dst[i]->value;
  }
}

void QuantizeToFloat(DenseNet& net) {
  for (Parameter* p : net.Parameters()) {
    p->value = p->value.cast<float>().cast<double>();
  }
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (Parameter* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::Step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Parameter& p = *params_[i];
    if (p.grad.rows() != m_[i].rows() || p.grad.cols() != m_[i].cols() ||
        p.value.rows() != m_[i].rows() || p.value.cols() != m_[i].cols()) {
      throw InvalidInput("Adam::Step: shape mismatch for parameter '" + p.name + "'");
    }
  }
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * p.grad;
    v_[i] = b2 * v_[i] + (1.0 - b2) * p.grad.cwiseAbs2();
    p.value.array() -= config_.lr * (m_[i].array() / c1) /
                       ((v_[i].array() / c2).sqrt() + config_.eps);
  }
}

void Adam::ZeroGrad() {
  for (Parameter* p : params_) p->ZeroGrad();
}

GaussianHead::GaussianHead(Vector mean_in, Vector log_std_in)
    : mean(std::move(mean_in)),
      log_std(log_std_in.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax)) {
  if (mean.size() != log_std.size()) {
    throw InvalidInput("GaussianHead: mean and log-std sizes differ");
  }
}

double GaussianLogProb(const GaussianHead& head, const Vector& x) {
  if (x.size() != head.mean.size()) {
    throw InvalidInput("GaussianLogProb: dimension mismatch");
  }
  double lp = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double z = (x(i) - head.mean(i)) * std::exp(-head.log_std(i));
    lp += -kHalfLog2Pi - head.log_std(i) - 0.5 * z * z;
  }
  return lp;
}

GaussianSample RSample(const GaussianHead& head, SeededRng& rng) {
  Vector v(head.mean.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = head.mean(i) + std::exp(head.log_std(i)) * rng.NextGaussian();
  }
  return {v, GaussianLogProb(head, v)};
}

GaussianSample TanhSquash(const GaussianSample& u) {
  GaussianSample out;
  out.value = u.value.array().tanh().matrix();
  out.log_prob = u.log_prob;
  for (Eigen::Index i = 0; i < out.value.size(); ++i) {
    out.log_prob -= std::log(1.0 - out.value(i) * out.value(i) + 1e-6);
  }
  return out;
}

double KlDiagGaussian(const Vector& mean, const Vector& std) {
  if (mean.size() != std.size()) throw InvalidInput("KlDiagGaussian: size mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    if (!(std(i) > 0.0)) throw InvalidInput("KlDiagGaussian: std must be positive");
    kl += 0.5 * (mean(i) * mean(i) + std(i) * std(i) - 1.0 - 2.0 * std::log(std(i)));
  }
  return kl;
}

namespace ad {

Var RSample(Var mean, Var log_std, const Matrix& noise) {
  Tape& t = *mean.tape();
  return Add(mean, Mul(Exp(log_std), t.Constant(noise)));
}

Var TanhLogDetJacobian(Var u) {
  Var y = Tanh(u);
  return SumCols(Log(AddScalar(Neg(Square(y)), 1.0 + 1e-6)));
}

}  // namespace ad
}  // namespace pivot
