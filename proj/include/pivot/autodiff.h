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

// Reverse-mode differentiation over a fixed set of batched matrix ops.
//
// Values are row-major in meaning: a (B x n) matrix holds B samples of an
// n-dimensional quantity. A Tape records every op in evaluation order;
// Backward() walks it in reverse and accumulates into Parameter::grad for
// every trainable parameter leaf. A tape is single-use.

#ifndef PIVOT_AUTODIFF_H_
#define PIVOT_AUTODIFF_H_

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pivot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}

  std::string name;
  Matrix value;
  Matrix grad;

  void ZeroGrad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  // Gradient of the loss w.r.t. this node; valid after Tape::Backward.
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf with no gradient sink. Gradients still reach it (see Var::grad)
  // when `track` is true, which tests use to differentiate w.r.t. inputs.
  Var Constant(Matrix value, bool track = false);
  // Leaf bound to a parameter. When trainable, Backward adds dL/dparam into
  // param.grad; otherwise the parameter acts as a constant.
  Var Param(Parameter& param, bool trainable = true);

  // loss must be 1x1 and recorded on this tape. Throws UsageError if the
  // tape is empty, the loss belongs elsewhere, or Backward already ran.
  void Backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  // Op construction hook. `backward` receives the node's output gradient.
  Var Record(Matrix value, std::vector<Var> inputs,
             std::function<void(const Matrix& g)> backward);
  bool NeedsGrad(Var v) const { return node(v).needs_grad; }
  // Accumulate into an input's gradient; no-op when it does not need one.
  void Accumulate(Var v, const Matrix& g);

 private:
  friend class Var;
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(const Matrix&)> backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };
  const Node& node(Var v) const { return nodes_[static_cast<std::size_t>(v.id_)]; }
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id_)]; }

  std::deque<Node> nodes_;
  bool done_ = false;
};

namespace ad {

// x (B x in) * w (in x out) + b (1 x out), b broadcast over rows.
Var Linear(Var x, Var w, Var b);
Var MatMul(Var a, Var b);
Var Relu(Var a);
Var Tanh(Var a);
Var Exp(Var a);
Var Log(Var a);
Var Square(Var a);

// Elementwise with broadcasting: an operand whose row (or column) count is 1
// is repeated along that axis.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);

Var Scale(Var a, double c);
Var AddScalar(Var a, double c);
Var Neg(Var a);
Var Minimum(Var a, Var b);  // same shapes; ties route the gradient to a
Var Clamp(Var a, double lo, double hi);

Var Sum(Var a);      // -> 1x1
Var Mean(Var a);     // -> 1x1
Var SumCols(Var a);  // (B x n) -> (B x 1)

Var SliceCols(Var a, Eigen::Index start, Eigen::Index n);
Var ConcatCols(Var a, Var b);

// Mean softmax cross-entropy of (B x K) logits against labels in [0, K).
Var SoftmaxCrossEntropy(Var logits, std::span<const int> labels);

// Row-wise diagonal Gaussian log density, (B x n) inputs -> (B x 1).
Var GaussianLogProb(Var x, Var mean, Var log_std);

// Row-wise KL(N(mean, exp(log_std)^2) || N(0, I)) -> (B x 1).
Var KlStdNormal(Var mean, Var log_std);

}  // namespace ad
}  // namespace pivot

#endif  // PIVOT_AUTODIFF_H_
