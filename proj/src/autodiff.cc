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

#include "pivot/autodiff.h"

#include <cmath>
#include <string>

#include "pivot/errors.h"

namespace pivot {

const Matrix& Var::value() const {
  if (!tape_) throw UsageError("Var is not bound to a tape");
  return tape_->node(*this).value;
}

const Matrix& Var::grad() const {
  if (!tape_) throw UsageError("Var is not bound to a tape");
  return tape_->node(*this).grad;
}

Var Tape::Constant(Matrix value, bool track) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, nullptr, track});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::Param(Parameter& param, bool trainable) {
  nodes_.push_back(Node{param.value, Matrix(), nullptr,
                        trainable ? &param : nullptr, trainable});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::Record(Matrix value, std::vector<Var> inputs,
                 std::function<void(const Matrix&)> backward) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape_ != this) throw UsageError("op mixes vars from different tapes");
    needs = needs || node(v).needs_grad;
  }
  nodes_.push_back(
      Node{std::move(value), Matrix(), needs ? std::move(backward) : nullptr,
           nullptr, needs});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::Accumulate(Var v, const Matrix& g) {
  Node& n = node(v);
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::Backward(Var loss) {
  if (nodes_.empty()) throw UsageError("backward called on an empty tape");
  if (done_) throw UsageError("backward already ran on this tape");
  if (loss.tape_ != this) throw UsageError("loss was not recorded on this tape");
  Node& root = node(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw UsageError("backward needs a scalar (1x1) loss");
  }
  done_ = true;
  root.grad = Matrix::Ones(1, 1);
  for (int i = loss.id_; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad) continue;
    if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    if (n.backward) n.backward(n.grad);
    if (n.param) n.param->grad += n.grad;
  }
}

namespace ad {
namespace {

void CheckBroadcast(const Matrix& a, const Matrix& b, const char* op) {
  const bool rows_ok =
      a.rows() == b.rows() || a.rows() == 1 || b.rows() == 1;
  const bool cols_ok =
      a.cols() == b.cols() || a.cols() == 1 || b.cols() == 1;
  if (!rows_ok || !cols_ok) {
    throw InvalidInput(std::string(op) + ": incompatible shapes " +
                       std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                       " and " + std::to_string(b.rows()) + "x" +
                       std::to_string(b.cols()));
  }
}

Matrix Expand(const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() == rows && m.cols() == cols) return m;
  return m.replicate(rows / m.rows(), cols / m.cols());
}

// Sums a broadcast gradient back down to the operand's shape.
Matrix Reduce(const Matrix& g, Eigen::Index rows, Eigen::Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  Matrix r = g;
  if (rows == 1 && g.rows() != 1) r = r.colwise().sum().eval();
  if (cols == 1 && g.cols() != 1) r = r.rowwise().sum().eval();
  return r;
}

void SameShape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput(std::string(op) + ": shapes differ");
  }
}

}  // namespace

Var Linear(Var x, Var w, Var b) {
  Tape& t = *x.tape();
  if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) {
    throw InvalidInput("Linear: dimension mismatch (input " +
                       std::to_string(x.cols()) + ", weight " +
                       std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                       ")");
  }
  Matrix out = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  return t.Record(std::move(out), {x, w, b}, [&t, x, w, b](const Matrix& g) {
    if (t.NeedsGrad(x)) t.Accumulate(x, g * w.value().transpose());
    if (t.NeedsGrad(w)) t.Accumulate(w, x.value().transpose() * g);
    if (t.NeedsGrad(b)) t.Accumulate(b, g.colwise().sum());
  });
}

Var MatMul(Var a, Var b) {
  Tape& t = *a.tape();
  if (a.cols() != b.rows()) throw InvalidInput("MatMul: inner dimensions differ");
  return t.Record(a.value() * b.value(), {a, b}, [&t, a, b](const Matrix& g) {
    if (t.NeedsGrad(a)) t.Accumulate(a, g * b.value().transpose());
    if (t.NeedsGrad(b)) t.Accumulate(b, a.value().transpose() * g);
  });
}

Var Relu(Var a) {
  Tape& t = *a.tape();
  return t.Record(a.value().cwiseMax(0.0), {a}, [&t, a](const Matrix& g) {
    t.Accumulate(a, (a.value().array() > 0.0).cast<double>().matrix().cwiseProduct(g));
  });
}

Var Tanh(Var a) {
  Tape& t = *a.tape();
  Matrix y = a.value().array().tanh().matrix();
  return t.Record(y, {a}, [&t, a, y](const Matrix& g) {
    t.Accumulate(a, ((1.0 - y.array().square()) * g.array()).matrix());
  });
}

Var Exp(Var a) {
  Tape& t = *a.tape();
  Matrix y = a.value().array().exp().matrix();
  return t.Record(y, {a}, [&t, a, y](const Matrix& g) {
    t.Accumulate(a, y.cwiseProduct(g));
  });
}

Var Log(Var a) {
  Tape& t = *a.tape();
  return t.Record(a.value().array().log().matrix(), {a}, [&t, a](const Matrix& g) {
    t.Accumulate(a, (g.array() / a.value().array()).matrix());
  });
}

Var Square(Var a) {
  Tape& t = *a.tape();
  return t.Record(a.value().array().square().matrix(), {a},
                  [&t, a](const Matrix& g) {
                    t.Accumulate(a, (2.0 * a.value().array() * g.array()).matrix());
                  });
}

Var Add(Var a, Var b) {
  Tape& t = *a.tape();
  CheckBroadcast(a.value(), b.value(), "Add");
  const Eigen::Index r = std::max(a.rows(), b.rows());
  const Eigen::Index c = std::max(a.cols(), b.cols());
  return t.Record(Expand(a.value(), r, c) + Expand(b.value(), r, c), {a, b},
                  [&t, a, b](const Matrix& g) {
                    if (t.NeedsGrad(a)) t.Accumulate(a, Reduce(g, a.rows(), a.cols()));
                    if (t.NeedsGrad(b)) t.Accumulate(b, Reduce(g, b.rows(), b.cols()));
                  });
}

Var Sub(Var a, Var b) {
  Tape& t = *a.tape();
  CheckBroadcast(a.value(), b.value(), "Sub");
  const Eigen::Index r = std::max(a.rows(), b.rows());
  const Eigen::Index c = std::max(a.cols(), b.cols());
  return t.Record(Expand(a.value(), r, c) - Expand(b.value(), r, c), {a, b},
                  [&t, a, b](const Matrix& g) {
                    if (t.NeedsGrad(a)) t.Accumulate(a, Reduce(g, a.rows(), a.cols()));
                    if (t.NeedsGrad(b)) t.Accumulate(b, -Reduce(g, b.rows(), b.cols()));
                  });
}

Var Mul(Var a, Var b) {
  Tape& t = *a.tape();
  CheckBroadcast(a.value(), b.value(), "Mul");
  const Eigen::Index r = std::max(a.rows(), b.rows());
  const Eigen::Index c = std::max(a.cols(), b.cols());
  return t.Record(Expand(a.value(), r, c).cwiseProduct(Expand(b.value(), r, c)),
                  {a, b}, [&t, a, b, r, c](const Matrix& g) {
                    if (t.NeedsGrad(a)) {
                      t.Accumulate(a, Reduce(g.cwiseProduct(Expand(b.value(), r, c)),
                                             a.rows(), a.cols()));
                    }
                    if (t.NeedsGrad(b)) {
                      t.Accumulate(b, Reduce(g.cwiseProduct(Expand(a.value(), r, c)),
                                             b.rows(), b.cols()));
                    }
                  });
}

Var Scale(Var a, double c) {
  Tape& t = *a.tape();
  return t.Record(a.value() * c, {a},
                  [&t, a, c](const Matrix& g) { t.Accumulate(a, g * c); });
}

Var AddScalar(Var a, double c) {
  Tape& t = *a.tape();
  return t.Record((a.value().array() + c).matrix(), {a},
                  [&t, a](const Matrix& g) { t.Accumulate(a, g); });
}

Var Neg(Var a) { return Scale(a, -1.0); }

Var Minimum(Var a, Var b) {
  Tape& t = *a.tape();
  SameShape(a, b, "Minimum");
  return t.Record(a.value().cwiseMin(b.value()), {a, b}, [&t, a, b](const Matrix& g) {
    const auto a_wins = (a.value().array() <= b.value().array()).cast<double>();
    if (t.NeedsGrad(a)) t.Accumulate(a, (a_wins * g.array()).matrix());
    if (t.NeedsGrad(b)) t.Accumulate(b, ((1.0 - a_wins) * g.array()).matrix());
  });
}

Var Clamp(Var a, double lo, double hi) {
  Tape& t = *a.tape();
  return t.Record(a.value().cwiseMax(lo).cwiseMin(hi), {a},
                  [&t, a, lo, hi](const Matrix& g) {
                    const auto inside = ((a.value().array() >= lo) &&
                                         (a.value().array() <= hi))
                                            .cast<double>();
                    t.Accumulate(a, (inside * g.array()).matrix());
                  });
}

Var Sum(Var a) {
  Tape& t = *a.tape();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.Record(std::move(out), {a}, [&t, a](const Matrix& g) {
    t.Accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var Mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw InvalidInput("Mean of an empty matrix");
  return Scale(Sum(a), 1.0 / n);
}

Var SumCols(Var a) {
  Tape& t = *a.tape();
  return t.Record(a.value().rowwise().sum(), {a}, [&t, a](const Matrix& g) {
    t.Accumulate(a, g.replicate(1, a.cols()));
  });
}

Var SliceCols(Var a, Eigen::Index start, Eigen::Index n) {
  Tape& t = *a.tape();
  if (start < 0 || n < 0 || start + n > a.cols()) {
    throw InvalidInput("SliceCols: range out of bounds");
  }
  return t.Record(a.value().middleCols(start, n), {a},
                  [&t, a, start, n](const Matrix& g) {
                    Matrix full = Matrix::Zero(a.rows(), a.cols());
                    full.middleCols(start, n) = g;
                    t.Accumulate(a, full);
                  });
}

Var ConcatCols(Var a, Var b) {
  Tape& t = *a.tape();
  if (a.rows() != b.rows()) throw InvalidInput("ConcatCols: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  return t.Record(std::move(out), {a, b}, [&t, a, b](const Matrix& g) {
    if (t.NeedsGrad(a)) t.Accumulate(a, g.leftCols(a.cols()));
    if (t.NeedsGrad(b)) t.Accumulate(b, g.rightCols(b.cols()));
  });
}

Var SoftmaxCrossEntropy(Var logits, std::span<const int> labels) {
  Tape& t = *logits.tape();
  const Matrix& z = logits.value();
  if (static_cast<Eigen::Index>(labels.size()) != z.rows()) {
    throw InvalidInput("SoftmaxCrossEntropy: one label per row required");
  }
  const Eigen::Index k = z.cols();
  Matrix probs(z.rows(), k);
  double loss = 0.0;
  std::vector<int> lab(labels.begin(), labels.end());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (lab[i] < 0 || lab[i] >= k) throw InvalidInput("class label out of range");
    const double mx = z.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (z.row(i).array() - mx).exp().matrix();
    const double s = e.sum();
    probs.row(i) = e / s;
    loss -= (z(i, lab[i]) - mx) - std::log(s);
  }
  const double inv_b = 1.0 / static_cast<double>(z.rows());
  Matrix out(1, 1);
  out(0, 0) = loss * inv_b;
  return t.Record(std::move(out), {logits},
                  [&t, logits, probs, lab, inv_b](const Matrix& g) {
                    Matrix d = probs;
                    for (std::size_t i = 0; i < lab.size(); ++i) {
                      d(static_cast<Eigen::Index>(i), lab[i]) -= 1.0;
                    }
                    t.Accumulate(logits, d * (inv_b * g(0, 0)));
                  });
}

Var GaussianLogProb(Var x, Var mean, Var log_std) {
  Tape& t = *x.tape();
  CheckBroadcast(x.value(), mean.value(), "GaussianLogProb");
  CheckBroadcast(x.value(), log_std.value(), "GaussianLogProb");
  const Eigen::Index r = x.rows(), c = x.cols();
  const Matrix ls = Expand(log_std.value(), r, c);
  const Matrix inv_std = (-ls.array()).exp().matrix();
  const Matrix z = ((x.value() - Expand(mean.value(), r, c)).array() *
                    inv_std.array())
                       .matrix();
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  Matrix out = (-kHalfLog2Pi - ls.array() - 0.5 * z.array().square())
                   .matrix()
                   .rowwise()
                   .sum();
  return t.Record(std::move(out), {x, mean, log_std},
                  [&t, x, mean, log_std, z, inv_std](const Matrix& g) {
                    const Matrix gb = g.replicate(1, z.cols());
                    const Matrix dz = (z.array() * inv_std.array() * gb.array()).matrix();
                    if (t.NeedsGrad(x)) t.Accumulate(x, -dz);
                    if (t.NeedsGrad(mean)) {
                      t.Accumulate(mean, Reduce(dz, mean.rows(), mean.cols()));
                    }
                    if (t.NeedsGrad(log_std)) {
                      const Matrix d =
                          ((z.array().square() - 1.0) * gb.array()).matrix();
                      t.Accumulate(log_std, Reduce(d, log_std.rows(), log_std.cols()));
                    }
                  });
}

Var KlStdNormal(Var mean, Var log_std) {
  Tape& t = *mean.tape();
  SameShape(mean, log_std, "KlStdNormal");
  const Matrix var = (2.0 * log_std.value().array()).exp().matrix();
  Matrix out = (0.5 * (mean.value().array().square() + var.array() - 1.0 -
                       2.0 * log_std.value().array()))
                   .matrix()
                   .rowwise()
                   .sum();
  return t.Record(std::move(out), {mean, log_std},
                  [&t, mean, log_std, var](const Matrix& g) {
                    const Matrix gb = g.replicate(1, var.cols());
                    if (t.NeedsGrad(mean)) {
                      t.Accumulate(mean, mean.value().cwiseProduct(gb));
                    }
                    if (t.NeedsGrad(log_std)) {
                      t.Accumulate(log_std, ((var.array() - 1.0) * gb.array()).matrix());
                    }
                  });
}

}  // namespace ad
}  // namespace pivot
