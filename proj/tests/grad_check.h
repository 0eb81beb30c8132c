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

// Central finite-difference oracle shared by the unit and acceptance suites.

#ifndef PIVOT_TESTS_GRAD_CHECK_H_
#define PIVOT_TESTS_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "pivot/adapt.h"
#include "pivot/autodiff.h"
#include "pivot/encoder.h"
#include "pivot/nn.h"
#include "pivot/rng.h"

namespace pivot::testing {

// Builds a scalar loss on `tape` from tracked leaves holding `inputs`.
using LossFn = std::function<Var(Tape&, const std::vector<Var>&)>;

inline Matrix RandomMatrix(SeededRng& rng, Eigen::Index r, Eigen::Index c,
                    double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.NextGaussian();
  return m;
}

// Entries bounded away from zero so kinks stay outside the FD stencil.
inline Matrix AwayFromZero(SeededRng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m = RandomMatrix(rng, r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = (m.data()[i] >= 0 ? 1 : -1) * (0.01 + std::abs(m.data()[i]));
  }
  return m;
}

// Wraps a unary/binary op output into a scalar with random weights.
inline LossFn Weighted(std::function<Var(Tape&, const std::vector<Var>&)> op,
                Matrix weights) {
  return [op, weights](Tape& t, const std::vector<Var>& in) {
    return ad::Sum(ad::Mul(op(t, in), t.Constant(weights)));
  };
}

struct Shape {
  Eigen::Index b, n;
};

inline Shape RandomShape(SeededRng& rng) {
  return {static_cast<Eigen::Index>(1 + rng.NextBelow(4)),
          static_cast<Eigen::Index>(1 + rng.NextBelow(5))};
}


inline double RelErr(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double EvalLoss(const LossFn& fn, const std::vector<Matrix>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const Matrix& m : inputs) vars.push_back(tape.Constant(m));
  return fn(tape, vars).value()(0, 0);
}

// Max relative error between reverse-mode and central-difference gradients
// over every entry of every input.
inline double MaxInputGradError(const LossFn& fn, std::vector<Matrix> inputs,
                                double h = 1e-5) {
  Tape tape;
  std::vector<Var> vars;
  for (const Matrix& m : inputs) vars.push_back(tape.Constant(m, true));
  Var loss = fn(tape, vars);
  tape.Backward(loss);
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Matrix analytic = vars[k].grad();
    for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
      const double orig = inputs[k].data()[i];
      inputs[k].data()[i] = orig + h;
      const double up = EvalLoss(fn, inputs);
      inputs[k].data()[i] = orig - h;
      const double down = EvalLoss(fn, inputs);
      inputs[k].data()[i] = orig;
      worst = std::max(worst, RelErr(analytic.data()[i], (up - down) / (2 * h)));
    }
  }
  return worst;
}

// Same check against a set of parameters instead of tape inputs. `loss`
// must rebuild the whole graph from current parameter values.
inline double MaxParamGradError(std::vector<Parameter*> params,
                                const std::function<double(bool)>& loss,
                                double h = 1e-5, int max_entries_per_param = 40) {
  for (Parameter* p : params) p->ZeroGrad();
  loss(true);  // records and back-propagates into Parameter::grad
  double worst = 0.0;
  for (Parameter* p : params) {
    const Matrix analytic = p->grad;
    const Eigen::Index n = p->value.size();
    const Eigen::Index stride =
        std::max<Eigen::Index>(1, n / max_entries_per_param);
    for (Eigen::Index i = 0; i < n; i += stride) {
      const double orig = p->value.data()[i];
      p->value.data()[i] = orig + h;
      const double up = loss(false);
      p->value.data()[i] = orig - h;
      const double down = loss(false);
      p->value.data()[i] = orig;
      worst = std::max(worst, RelErr(analytic.data()[i], (up - down) / (2 * h)));
    }
  }
  return worst;
}

// A randomized op check: builds a loss and its inputs from the stream.
struct OpCase {
  const char* name;
  std::function<std::pair<LossFn, std::vector<Matrix>>(SeededRng&)> make;
};

inline constexpr int kOpConfigs = 100;
inline constexpr double kOpTol = 1e-4;
inline constexpr double kLossTol = 1e-3;

template <typename F>
OpCase Unary(const char* name, F op, std::function<Matrix(SeededRng&, const Shape&)> gen) {
  return {name, [op, gen](SeededRng& r) {
            const Shape s = RandomShape(r);
            Matrix x = gen(r, s);
            return std::pair{Weighted([op](Tape&, const std::vector<Var>& in) { return op(in[0]); },
                                      RandomMatrix(r, s.b, s.n)),
                             std::vector{std::move(x)}};
          }};
}

inline std::vector<OpCase> OpGradCases() {
  const auto gauss = [](SeededRng& r, const Shape& s) { return RandomMatrix(r, s.b, s.n); };
  std::vector<OpCase> cases;
  cases.push_back({"Linear", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    const Eigen::Index out = 1 + r.NextBelow(4);
    return std::pair{Weighted([](Tape&, auto& in) { return ad::Linear(in[0], in[1], in[2]); },
                              RandomMatrix(r, s.b, out)),
                     std::vector{RandomMatrix(r, s.b, s.n), RandomMatrix(r, s.n, out),
                                 RandomMatrix(r, 1, out)}};
  }});
  cases.push_back({"MatMul", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    const Eigen::Index out = 1 + r.NextBelow(4);
    return std::pair{Weighted([](Tape&, auto& in) { return ad::MatMul(in[0], in[1]); },
                              RandomMatrix(r, s.b, out)),
                     std::vector{RandomMatrix(r, s.b, s.n), RandomMatrix(r, s.n, out)}};
  }});
  cases.push_back(Unary("Relu", [](Var x) { return ad::Relu(x); },
                        [](SeededRng& r, const Shape& s) { return AwayFromZero(r, s.b, s.n); }));
  cases.push_back(Unary("Tanh", [](Var x) { return ad::Tanh(x); }, gauss));
  cases.push_back(Unary("Exp", [](Var x) { return ad::Exp(x); }, gauss));
  cases.push_back(Unary("Log", [](Var x) { return ad::Log(x); }, [](SeededRng& r, const Shape& s) {
    return Matrix((RandomMatrix(r, s.b, s.n).array().abs() + 0.1).matrix());
  }));
  cases.push_back(Unary("Square", [](Var x) { return ad::Square(x); }, gauss));
  cases.push_back(Unary("Scale", [](Var x) { return ad::Scale(x, -2.5); }, gauss));
  cases.push_back(Unary("AddScalar", [](Var x) { return ad::AddScalar(x, 0.7); }, gauss));
  cases.push_back(Unary("Neg", [](Var x) { return ad::Neg(x); }, gauss));
  cases.push_back(Unary("Clamp", [](Var x) { return ad::Clamp(x, -0.5, 0.5); },
                        [](SeededRng& r, const Shape& s) {
                          return Matrix((AwayFromZero(r, s.b, s.n).array() - 0.5).matrix());
                        }));
  cases.push_back({"TanhLogDetJacobian", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    return std::pair{Weighted([](Tape&, auto& in) { return ad::TanhLogDetJacobian(in[0]); },
                              RandomMatrix(r, s.b, 1)),
                     std::vector{RandomMatrix(r, s.b, s.n)}};
  }});
  cases.push_back({"BroadcastArithmetic", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    // b alternates between full, row-vector, column-vector and scalar shapes.
    const int mode = static_cast<int>(r.NextBelow(4));
    const Eigen::Index br = (mode == 1 || mode == 3) ? 1 : s.b;
    const Eigen::Index bc = (mode == 2 || mode == 3) ? 1 : s.n;
    return std::pair{
        Weighted([](Tape&, auto& in) {
                   return ad::Mul(ad::Sub(ad::Add(in[0], in[1]), in[1]), ad::Add(in[1], in[0]));
                 },
                 RandomMatrix(r, s.b, s.n)),
        std::vector{RandomMatrix(r, s.b, s.n), RandomMatrix(r, br, bc)}};
  }});
  cases.push_back({"Minimum", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    const Matrix a = RandomMatrix(r, s.b, s.n);
    const Matrix b = a + AwayFromZero(r, s.b, s.n);
    return std::pair{Weighted([](Tape&, auto& in) { return ad::Minimum(in[0], in[1]); },
                              RandomMatrix(r, s.b, s.n)),
                     std::vector{a, b}};
  }});
  cases.push_back({"ReductionsAndSlicing", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    return std::pair{LossFn([](Tape&, const std::vector<Var>& in) {
                       Var cat = ad::ConcatCols(in[0], in[1]);
                       Var part = ad::SliceCols(cat, 1, cat.cols() - 1);
                       return ad::Add(ad::Mean(ad::Square(part)), ad::Sum(ad::Square(ad::SumCols(cat))));
                     }),
                     std::vector{RandomMatrix(r, s.b, s.n), RandomMatrix(r, s.b, 2)}};
  }});
  cases.push_back({"SoftmaxCrossEntropy", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    const Eigen::Index k = 2 + r.NextBelow(4);
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < s.b; ++i) labels.push_back(static_cast<int>(r.NextBelow(k)));
    return std::pair{LossFn([labels](Tape&, const std::vector<Var>& in) {
                       return ad::SoftmaxCrossEntropy(in[0], labels);
                     }),
                     std::vector{RandomMatrix(r, s.b, k, 2.0)}};
  }});
  cases.push_back({"GaussianLogProb", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    return std::pair{
        Weighted([](Tape&, auto& in) { return ad::GaussianLogProb(in[0], in[1], in[2]); },
                 RandomMatrix(r, s.b, 1)),
        std::vector{RandomMatrix(r, s.b, s.n), RandomMatrix(r, s.b, s.n), RandomMatrix(r, s.b, s.n, 0.5)}};
  }});
  cases.push_back({"KlStdNormal", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    return std::pair{Weighted([](Tape&, auto& in) { return ad::KlStdNormal(in[0], in[1]); },
                              RandomMatrix(r, s.b, 1)),
                     std::vector{RandomMatrix(r, s.b, s.n), RandomMatrix(r, s.b, s.n, 0.5)}};
  }});
  cases.push_back({"ReparameterizedSample", [](SeededRng& r) {
    const Shape s = RandomShape(r);
    const Matrix noise = RandomMatrix(r, s.b, s.n);
    return std::pair{Weighted([noise](Tape&, auto& in) { return ad::RSample(in[0], in[1], noise); },
                              RandomMatrix(r, s.b, s.n)),
                     std::vector{RandomMatrix(r, s.b, s.n), RandomMatrix(r, s.b, s.n, 0.5)}};
  }});
  return cases;
}

// Worst error of one op case over `configs` random draws.
inline double OpCaseError(const OpCase& c, int configs = kOpConfigs, std::uint64_t seed = 1234) {
  SeededRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < configs; ++i) {
    auto [fn, inputs] = c.make(rng);
    worst = std::max(worst, MaxInputGradError(fn, inputs));
  }
  return worst;
}

// Worst parameter-gradient error of a projection net's clipped surrogate
// over `configs` random nets and batches. Ratios stay inside (0.9, 1.1),
// away from the clip corners.
inline double ProjectionLossError(bool state, ClipForm form, int configs, std::uint64_t seed) {
  SeededRng rng(seed);
  const int in = state ? kFeatureDim : kFeatureDim + kObsDim;
  const int out = state ? kStateProjDim : kActionProjDim;
  double worst = 0.0;
  for (int c = 0; c < configs; ++c) {
    ProjectionNet net(in, 16, out, true, rng, "p");
    for (Parameter* p : net.net().Parameters()) {
      for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] += 0.05 * rng.NextGaussian();
    }
    const int n = 1 + static_cast<int>(rng.NextBelow(6));
    Matrix inputs(n, in), values(n, out);
    Vector old(n), adv(n);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < in; ++j) inputs(k, j) = rng.NextGaussian();
      const DiagonalTransform t = net.Sample(inputs.row(k).transpose(), rng);
      values.row(k) = t.diag.transpose();
      old(k) = t.log_prob + SampleUniform(rng, -0.09, 0.09);
      adv(k) = SampleUniform(rng, -1.0, 1.0);
    }
    worst = std::max(worst, MaxParamGradError(net.net().Parameters(), [&](bool backward) {
      Tape tape;
      Var obj = ProjectionObjective(tape, net, inputs, values, old, adv, 0.2, form);
      if (backward) tape.Backward(obj);
      return obj.value()(0, 0);
    }, 1e-6, 20));
  }
  return worst;
}

}  // namespace pivot::testing

#endif  // PIVOT_TESTS_GRAD_CHECK_H_
