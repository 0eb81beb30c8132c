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

// Object feature encoder: a stochastic bottleneck over top-down depth images
// trained to predict object class and size.

#ifndef PIVOT_ENCODER_H_
#define PIVOT_ENCODER_H_

#include <span>
#include <vector>

#include "pivot/nn.h"
#include "pivot/rng.h"
#include "pivot/shapes.h"

namespace pivot {

inline constexpr int kFeatureDim = 8;
inline constexpr int kImagePixels = DepthImage::kSize * DepthImage::kSize;
// Heights (m) are multiplied by this before entering the trunk.
inline constexpr double kDepthInputScale = 20.0;

// Re-renders the image in its own principal-axes frame: the silhouette
// centroid moves to the image center and its major axis to +x.
// Empty images are returned unchanged.
DepthImage CanonicalizeImage(const DepthImage& img);

// Row-major flattening of the canonicalized height map, scaled by
// kDepthInputScale. Throws InvalidInput unless the image is 32 x 32.
Vector EncoderInput(const DepthImage& img);

enum class EncodeMode { kSample, kMean };

// mean + std * eps, eps ~ N(0, I). std may be zero.
Vector SampleFeature(const Vector& mean, const Vector& std, SeededRng& rng);

class EncoderNet {
 public:
  EncoderNet() = default;
  explicit EncoderNet(SeededRng& rng);

  DenseNet& trunk() { return trunk_; }
  const DenseNet& trunk() const { return trunk_; }
  DenseNet& head() { return head_; }
  const DenseNet& head() const { return head_; }

  GaussianHead FeatureHead(const DepthImage& img) const;
  // kSample needs rng; kMean ignores it.
  Vector Encode(const DepthImage& img, SeededRng* rng, EncodeMode mode) const;

  struct Prediction {
    ObjectClass object_class;
    Eigen::Vector3d size;
  };
  // Uses the mean feature.
  Prediction Predict(const DepthImage& img) const;

  struct TapeOutput {
    Var mean, log_std, feature;
    Var size;    // B x 3
    Var logits;  // B x 4
  };
  // pixels rows are EncoderInput outputs; noise is B x kFeatureDim.
  TapeOutput Forward(Tape& tape, const Matrix& pixels, const Matrix& noise);

  std::vector<Parameter*> Parameters();

 private:
  DenseNet trunk_;  // 1024 -> 256 -> 128 -> 2 * kFeatureDim
  DenseNet head_;   // kFeatureDim -> 3 + kNumClasses, one linear layer
};

struct EncoderLosses {
  double total = 0.0, shape = 0.0, cls = 0.0, kl = 0.0;
};

struct EncoderBatch {
  Matrix pixels;  // B x 1024
  Matrix sizes;   // B x 3, meters
  std::vector<int> labels;
};

EncoderBatch MakeEncoderBatch(const Dataset& ds, std::span<const int> indices);

// L = L_shape + L_class + beta * L_KL with
//   L_shape = batch mean of ||s - s_hat||^2,
//   L_class = batch mean softmax cross-entropy,
//   L_KL    = batch mean KL(N(f_mean, f_std) || N(0, I)).
Var EncoderLoss(Tape& tape, EncoderNet& net, const EncoderBatch& batch,
                const Matrix& noise, double beta, EncoderLosses* parts = nullptr,
                double shape_weight = 1.0);

struct EncoderConfig {
  double beta = 0.001;
  double shape_weight = 1.0;
  double lr = 1e-3;
  int batch_size = 128;
  int epochs = 50;
  double holdout_fraction = 0.1;
};

void ValidateEncoderConfig(const EncoderConfig& cfg);

struct DatasetSplit {
  std::vector<int> train, holdout;  // entry indices
  std::vector<int> holdout_sources;
};

// Whole source objects go to one side of the split.
DatasetSplit SplitBySource(const Dataset& ds, double holdout_fraction, SeededRng& rng);

struct EncoderMetricsRow {
  int epoch = 0;
  double train_loss = 0.0;
  double holdout_accuracy = 0.0;
  double holdout_size_rmse = 0.0;  // m, over all 3 components
  double kl = 0.0;
};

struct EncoderEval {
  double accuracy = 0.0;
  double size_rmse = 0.0;
};

EncoderEval EvaluateEncoder(const EncoderNet& net, const Dataset& ds,
                            std::span<const int> indices);

struct EncoderTrainResult {
  DatasetSplit split;
  std::vector<EncoderMetricsRow> metrics;
};

EncoderTrainResult TrainEncoder(EncoderNet& net, const Dataset& ds, const EncoderConfig& cfg,
                                SeededRng& rng);

struct PcaResult {
  Matrix coords;                   // n x 2, centered
  Eigen::Vector2d explained_ratio; // share of total variance
};

// Throws InvalidInput with fewer than 3 features.
PcaResult FeaturePca(const std::vector<Vector>& features);

struct ClusterDistances {
  double intra = 0.0;  // mean pairwise distance within a class
  double inter = 0.0;  // mean pairwise distance across classes
};

ClusterDistances FeatureClusterDistances(const std::vector<Vector>& features,
                                         std::span<const int> labels);

}  // namespace pivot

#endif  // PIVOT_ENCODER_H_
