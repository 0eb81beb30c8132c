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

#include "pivot/encoder.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>

#include "pivot/errors.h"

namespace pivot {
namespace {

constexpr int kSizeDims = 3;

void Shuffle(std::vector<int>& v, SeededRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.NextBelow(i));
    std::swap(v[i - 1], v[j]);
  }
}

Matrix GaussianNoise(Eigen::Index rows, SeededRng& rng) {
  Matrix m(rows, kFeatureDim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.NextGaussian();
  return m;
}

}  // namespace

DepthImage CanonicalizeImage(const DepthImage& img) {
  const Matrix& h = img.heights;
  const int n = DepthImage::kSize;
  double mass = 0.0, cx = 0.0, cy = 0.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (h(r, c) <= 0) continue;
      mass += 1.0;
      cx += c;
      cy += r;
    }
  }
  if (mass == 0.0) return img;
  cx /= mass;
  cy /= mass;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (h(r, c) <= 0) continue;
      sxx += (c - cx) * (c - cx);
      syy += (r - cy) * (r - cy);
      sxy += (c - cx) * (r - cy);
    }
  }
  const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const double cs = std::cos(phi), sn = std::sin(phi);
  const double mid = 0.5 * (n - 1);
  DepthImage out;
  out.pixel_pitch = img.pixel_pitch;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double u = c - mid, v = r - mid;
      const long sc = std::lround(cx + cs * u - sn * v);
      const long sr = std::lround(cy + sn * u + cs * v);
      if (sc >= 0 && sc < n && sr >= 0 && sr < n) out.heights(r, c) = h(sr, sc);
    }
  }
  return out;
}

Vector EncoderInput(const DepthImage& img) {
  if (img.heights.rows() != DepthImage::kSize || img.heights.cols() != DepthImage::kSize) {
    throw InvalidInput("encoder expects a 32x32 depth image, got " +
                       std::to_string(img.heights.rows()) + "x" +
                       std::to_string(img.heights.cols()));
  }
  const DepthImage canon = CanonicalizeImage(img);
  Vector v(kImagePixels);
  for (int r = 0; r < DepthImage::kSize; ++r) {
    for (int c = 0; c < DepthImage::kSize; ++c) {
      v(r * DepthImage::kSize + c) = kDepthInputScale * canon.heights(r, c);
    }
  }
  return v;
}

Vector SampleFeature(const Vector& mean, const Vector& std, SeededRng& rng) {
  if (mean.size() != std.size()) throw InvalidInput("SampleFeature: size mismatch");
  Vector f(mean.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = mean(i) + std(i) * rng.NextGaussian();
  return f;
}

EncoderNet::EncoderNet(SeededRng& rng)
    : trunk_({kImagePixels, 256, 128, 2 * kFeatureDim}, Activation::kRelu, rng, "enc_trunk"),
      head_({kFeatureDim, kSizeDims + kNumClasses}, Activation::kLinear, rng, "enc_head") {}

GaussianHead EncoderNet::FeatureHead(const DepthImage& img) const {
  const Vector out = trunk_.Forward(EncoderInput(img));
  return GaussianHead(out.head(kFeatureDim), out.tail(kFeatureDim));
}

Vector EncoderNet::Encode(const DepthImage& img, SeededRng* rng, EncodeMode mode) const {
  const GaussianHead h = FeatureHead(img);
  if (mode == EncodeMode::kMean) return h.mean;
  if (!rng) throw InvalidInput("EncoderNet::Encode: sample mode needs an rng");
  return SampleFeature(h.mean, h.Std(), *rng);
}

EncoderNet::Prediction EncoderNet::Predict(const DepthImage& img) const {
  const Vector out = head_.Forward(FeatureHead(img).mean);
  Eigen::Index best;
  out.tail(kNumClasses).maxCoeff(&best);
  return Prediction{static_cast<ObjectClass>(best), out.head<kSizeDims>()};
}

EncoderNet::TapeOutput EncoderNet::Forward(Tape& tape, const Matrix& pixels,
                                           const Matrix& noise) {
  if (pixels.cols() != kImagePixels) throw InvalidInput("EncoderNet: expected 1024 pixels");
  if (noise.rows() != pixels.rows() || noise.cols() != kFeatureDim) {
    throw InvalidInput("EncoderNet: noise must be B x 8");
  }
  Var out = trunk_.Forward(tape, tape.Constant(pixels));
  TapeOutput o;
  o.mean = ad::SliceCols(out, 0, kFeatureDim);
  o.log_std = ad::Clamp(ad::SliceCols(out, kFeatureDim, kFeatureDim), kLogStdMin, kLogStdMax);
  o.feature = ad::RSample(o.mean, o.log_std, noise);
  Var pred = head_.Forward(tape, o.feature);
  o.size = ad::SliceCols(pred, 0, kSizeDims);
  o.logits = ad::SliceCols(pred, kSizeDims, kNumClasses);
  return o;
}

std::vector<Parameter*> EncoderNet::Parameters() {
  std::vector<Parameter*> p = trunk_.Parameters();
  for (Parameter* q : head_.Parameters()) p.push_back(q);
  return p;
}

EncoderBatch MakeEncoderBatch(const Dataset& ds, std::span<const int> indices) {
  const auto n = static_cast<Eigen::Index>(indices.size());
  EncoderBatch b{Matrix(n, kImagePixels), Matrix(n, kSizeDims), {}};
  b.labels.reserve(indices.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const DatasetEntry& e = ds.entries.at(static_cast<std::size_t>(indices[k]));
    b.pixels.row(k) = EncoderInput(e.image).transpose();
    b.sizes.row(k) = e.size.transpose();
    b.labels.push_back(static_cast<int>(e.object_class));
  }
  return b;
}

Var EncoderLoss(Tape& tape, EncoderNet& net, const EncoderBatch& batch, const Matrix& noise,
                double beta, EncoderLosses* parts, double shape_weight) {
  if (batch.pixels.rows() == 0) throw InvalidInput("EncoderLoss: empty batch");
  const EncoderNet::TapeOutput o = net.Forward(tape, batch.pixels, noise);
  Var shape = ad::Mean(ad::SumCols(ad::Square(ad::Sub(o.size, tape.Constant(batch.sizes)))));
  Var cls = ad::SoftmaxCrossEntropy(o.logits, batch.labels);
  Var kl = ad::Mean(ad::KlStdNormal(o.mean, o.log_std));
  Var total = ad::Add(ad::Add(ad::Scale(shape, shape_weight), cls), ad::Scale(kl, beta));
  if (parts) {
    *parts = EncoderLosses{total.value()(0, 0), shape.value()(0, 0), cls.value()(0, 0),
                           kl.value()(0, 0)};
  }
  return total;
}

void ValidateEncoderConfig(const EncoderConfig& c) {
  auto req = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string("encoder.") + field + " " + what);
  };
  req(c.beta >= 0, "beta", "must be non-negative");
  req(c.lr > 0, "lr", "must be positive");
  req(c.batch_size > 0, "batch_size", "must be positive");
  req(c.epochs >= 0, "epochs", "must be non-negative");
  req(c.holdout_fraction > 0 && c.holdout_fraction < 1, "holdout_fraction", "must be in (0, 1)");
}

DatasetSplit SplitBySource(const Dataset& ds, double holdout_fraction, SeededRng& rng) {
  std::set<int> source_set;
  for (const DatasetEntry& e : ds.entries) source_set.insert(e.source);
  std::vector<int> sources(source_set.begin(), source_set.end());
  Shuffle(sources, rng);
  const auto n_hold = static_cast<std::size_t>(
      std::lround(holdout_fraction * static_cast<double>(sources.size())));
  DatasetSplit split;
  split.holdout_sources.assign(sources.begin(),
                               sources.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::sort(split.holdout_sources.begin(), split.holdout_sources.end());
  for (std::size_t i = 0; i < ds.entries.size(); ++i) {
    const bool hold = std::binary_search(split.holdout_sources.begin(),
                                         split.holdout_sources.end(), ds.entries[i].source);
    (hold ? split.holdout : split.train).push_back(static_cast<int>(i));
  }
  return split;
}

EncoderEval EvaluateEncoder(const EncoderNet& net, const Dataset& ds,
                            std::span<const int> indices) {
  if (indices.empty()) throw InvalidInput("EvaluateEncoder: no entries");
  EncoderEval ev;
  double sq = 0.0;
  for (int i : indices) {
    const DatasetEntry& e = ds.entries.at(static_cast<std::size_t>(i));
    const EncoderNet::Prediction p = net.Predict(e.image);
    if (p.object_class == e.object_class) ev.accuracy += 1.0;
    sq += (p.size - e.size).squaredNorm();
  }
  const auto n = static_cast<double>(indices.size());
  ev.accuracy /= n;
  ev.size_rmse = std::sqrt(sq / (kSizeDims * n));
  return ev;
}

EncoderTrainResult TrainEncoder(EncoderNet& net, const Dataset& ds, const EncoderConfig& cfg,
                                SeededRng& rng) {
  ValidateEncoderConfig(cfg);
  EncoderTrainResult result;
  result.split = SplitBySource(ds, cfg.holdout_fraction, rng);
  if (result.split.train.empty() || result.split.holdout.empty()) {
    throw InvalidInput("TrainEncoder: dataset too small to split");
  }
  Adam opt(net.Parameters(), AdamConfig{cfg.lr});
  std::vector<int> order = result.split.train;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Shuffle(order, rng);
    double loss_sum = 0.0, kl_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const EncoderBatch b =
          MakeEncoderBatch(ds, std::span<const int>(order.data() + start, end - start));
      EncoderLosses parts;
      opt.ZeroGrad();
      Tape tape;
      Var loss = EncoderLoss(tape, net, b, GaussianNoise(b.pixels.rows(), rng), cfg.beta, &parts,
                           cfg.shape_weight);
      tape.Backward(loss);
      opt.Step();
      loss_sum += parts.total;
      kl_sum += parts.kl;
      ++batches;
    }
    const EncoderEval ev = EvaluateEncoder(net, ds, result.split.holdout);
    result.metrics.push_back(EncoderMetricsRow{epoch, loss_sum / batches, ev.accuracy,
                                               ev.size_rmse, kl_sum / batches});
  }
  return result;
}

PcaResult FeaturePca(const std::vector<Vector>& features) {
  if (features.size() < 3) throw InvalidInput("FeaturePca: need at least 3 features");
  const auto n = static_cast<Eigen::Index>(features.size());
  const Eigen::Index d = features[0].size();
  if (d < 2) throw InvalidInput("FeaturePca: features must have at least 2 dims");
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (features[static_cast<std::size_t>(i)].size() != d) {
      throw InvalidInput("FeaturePca: feature sizes differ");
    }
    x.row(i) = features[static_cast<std::size_t>(i)].transpose();
  }
  x.rowwise() -= x.colwise().mean();
  const Matrix cov = x.transpose() * x / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  // Eigenvalues come out ascending.
  Matrix top(d, 2);
  top.col(0) = eig.eigenvectors().col(d - 1);
  top.col(1) = eig.eigenvectors().col(d - 2);
  PcaResult r;
  r.coords = x * top;
  const double total = std::max(eig.eigenvalues().sum(), 0.0);
  if (total > 0) {
    r.explained_ratio << std::max(eig.eigenvalues()(d - 1), 0.0) / total,
        std::max(eig.eigenvalues()(d - 2), 0.0) / total;
  } else {
    r.explained_ratio.setZero();
  }
  return r;
}

ClusterDistances FeatureClusterDistances(const std::vector<Vector>& features,
                                         std::span<const int> labels) {
  if (features.size() != labels.size()) {
    throw InvalidInput("FeatureClusterDistances: one label per feature required");
  }
  double intra = 0.0, inter = 0.0;
  long n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = i + 1; j < features.size(); ++j) {
      const double dist = (features[i] - features[j]).norm();
      if (labels[i] == labels[j]) {
        intra += dist;
        ++n_intra;
      } else {
        inter += dist;
        ++n_inter;
      }
    }
  }
  if (n_intra == 0 || n_inter == 0) {
    throw InvalidInput("FeatureClusterDistances: need pairs within and across classes");
  }
  return ClusterDistances{intra / static_cast<double>(n_intra),
                          inter / static_cast<double>(n_inter)};
}

}  // namespace pivot
