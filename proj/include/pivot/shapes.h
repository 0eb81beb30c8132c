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

// Parametric objects, their top-down depth images and the labelled dataset
// the feature encoder is trained on.
//
// Geometry per class (sizes are (l_x, l_y, l_z) in meters):
//   box       cuboid.
//   circle    flat disc, diameter l_x = l_y, thickness l_z.
//   cylinder  lying on its side, axis along Y, length l_y, diameter
//             l_x = l_z.
//   peg       a long thin cylinder, l_y >= 2 l_z.
// Cross-sections live in the object's X-Z body frame with the origin at the
// middle of the bottom edge, so the outline spans [-l_x/2, l_x/2] x [0, l_z].

#ifndef PIVOT_SHAPES_H_
#define PIVOT_SHAPES_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pivot/rng.h"

namespace pivot {

enum class ObjectClass { kBox = 0, kCircle = 1, kCylinder = 2, kPeg = 3 };
inline constexpr int kNumClasses = 4;

std::string ClassName(ObjectClass c);
// Throws InvalidInput for unknown names.
ObjectClass ClassFromName(const std::string& name);

using Vec2 = Eigen::Vector2d;
using Polygon = std::vector<Vec2>;

struct Friction {
  double table = 0.5;
  double wall = 0.5;
  double gripper = 0.5;
};

struct ObjectSpec {
  ObjectClass object_class = ObjectClass::kBox;
  Eigen::Vector3d size = Eigen::Vector3d::Zero();
  double mass = 0.0;       // kg
  double inertia = 0.0;    // kg m^2 about the Y axis through the centroid
  Friction friction;
  Polygon cross_section;   // counter-clockwise in (x, z)
};

inline constexpr double kDensity = 500.0;      // kg/m^3
inline constexpr int kCircleSegments = 32;

// Builds a spec with derived polygon, mass and inertia. Throws InvalidInput
// for non-positive sizes.
ObjectSpec MakeObject(ObjectClass c, const Eigen::Vector3d& size,
                      const Friction& friction = {});
// The 9 x 9 x 3 cm reference box.
ObjectSpec UnitaryObject();
ObjectSpec SampleObject(ObjectClass c, SeededRng& rng);
// 10 objects per class, class-major order.
std::vector<ObjectSpec> SampleObjectPool(SeededRng& rng, int per_class = 10);

Polygon CrossSection(const ObjectSpec& spec);
double PolygonArea(const Polygon& poly);  // signed, > 0 for CCW
Vec2 PolygonCentroid(const Polygon& poly);
bool IsConvexCcw(const Polygon& poly);
bool PointInConvexPolygon(const Polygon& poly, const Vec2& p);

// Top-down depth image: heights above the table in meters.
struct DepthImage {
  static constexpr int kSize = 32;
  static constexpr double kFieldOfView = 0.25;  // m
  static constexpr double kPixelPitch = kFieldOfView / kSize;

  DepthImage() : heights(Eigen::MatrixXd::Zero(kSize, kSize)) {}
  Eigen::MatrixXd heights;  // rows follow y, columns follow x
  double pixel_pitch = kPixelPitch;

  int NonZeroCount() const;
};

// Object centered on pixel (16, 16). Throws InvalidInput when the
// footprint does not fit in the field of view.
DepthImage RenderDepth(const ObjectSpec& spec);

struct AugmentParams {
  double angle = 0.0;  // rad, counter-clockwise
  int shift_x = 0;     // pixels
  int shift_y = 0;
  double noise_std = 0.0;  // m, applied to object pixels only
};

inline constexpr int kMaxShiftPixels = 4;
inline constexpr double kAugmentNoiseStd = 0.002;

// Nearest-neighbour rotation about the image center, then an integer shift,
// then clamped Gaussian noise on object pixels. Background stays 0.
DepthImage ApplyAugmentation(const DepthImage& img, const AugmentParams& params,
                             SeededRng& rng);
// Random shift in [-4, 4] px, angle in [0, 2 pi), noise std 2 mm.
DepthImage Augment(const DepthImage& img, SeededRng& rng);

struct DatasetEntry {
  DepthImage image;
  ObjectClass object_class = ObjectClass::kBox;
  Eigen::Vector3d size = Eigen::Vector3d::Zero();
  int source = 0;          // index of the generating object
  std::uint64_t seed = 0;  // seed of the augmentation stream
};

struct Dataset {
  std::vector<DatasetEntry> entries;
};

inline constexpr int kObjectsPerClass = 100;
inline constexpr int kAugmentationsPerObject = 10;

// per_class objects for each class, each augmented `augmentations` times.
// Entries are ordered by source object, then augmentation index.
Dataset BuildDataset(SeededRng& rng, int per_class = kObjectsPerClass,
                     int augmentations = kAugmentationsPerObject);

// Writes manifest.json plus one 16-bit binary PGM per entry (heights in
// units of 0.1 mm). Creates the directory if needed.
void ExportDataset(const Dataset& dataset, const std::filesystem::path& dir);
// Throws MissingArtifact when the manifest is absent, ParseError when a
// file is malformed.
Dataset LoadDataset(const std::filesystem::path& dir);

void WritePgm16(const DepthImage& img, const std::filesystem::path& path);
DepthImage ReadPgm16(const std::filesystem::path& path);

}  // namespace pivot

#endif  // PIVOT_SHAPES_H_
