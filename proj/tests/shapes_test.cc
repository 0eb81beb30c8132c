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

#include "pivot/shapes.h"

#include <array>
#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "pivot/core_math.h"
#include "pivot/errors.h"

namespace pivot {
namespace {

// Triangle-fan area, independent of the shoelace sum.
double FanArea(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const Vec2 u = p[i] - p[0], v = p[i + 1] - p[0];
    a += 0.5 * (u.x() * v.y() - u.y() * v.x());
  }
  return a;
}

// Even-odd ray casting.
bool RayCastInside(const Polygon& p, const Vec2& q) {
  bool inside = false;
  for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
    if ((p[i].y() > q.y()) != (p[j].y() > q.y()) &&
        q.x() < (p[j].x() - p[i].x()) * (q.y() - p[i].y()) / (p[j].y() - p[i].y()) +
                    p[i].x()) {
      inside = !inside;
    }
  }
  return inside;
}

std::vector<ObjectSpec> RandomSpecs(int n, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<ObjectSpec> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(SampleObject(static_cast<ObjectClass>(i % kNumClasses), rng));
  }
  return out;
}

TEST(SampleObject, BoxSizesStayInRange) {
  SeededRng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const ObjectSpec s = SampleObject(ObjectClass::kBox, rng);
    ASSERT_GE(s.size.x(), 0.04);
    ASSERT_LE(s.size.x(), 0.20);
    ASSERT_GE(s.size.y(), 0.01);
    ASSERT_LE(s.size.y(), 0.15);
    ASSERT_GE(s.size.z(), 0.01);
    ASSERT_LE(s.size.z(), 0.06);
  }
}

TEST(SampleObject, ClassRulesHold) {
  SeededRng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const ObjectSpec c = SampleObject(ObjectClass::kCircle, rng);
    EXPECT_EQ(c.size.x(), c.size.y());
    const ObjectSpec cyl = SampleObject(ObjectClass::kCylinder, rng);
    EXPECT_EQ(cyl.size.x(), cyl.size.z());
    const ObjectSpec peg = SampleObject(ObjectClass::kPeg, rng);
    EXPECT_GE(peg.size.y(), 2 * peg.size.z());
    for (const auto* s : {&c, &cyl, &peg}) {
      EXPECT_GE(s->size.z(), 0.01);
      EXPECT_LE(s->size.z(), 0.06);
      EXPECT_LE(s->size.y(), 0.15);
    }
  }
}

TEST(SampleObject, UnitaryObjectIsNineByNineByThree) {
  const ObjectSpec u = UnitaryObject();
  EXPECT_EQ(u.object_class, ObjectClass::kBox);
  EXPECT_EQ(u.size, Eigen::Vector3d(0.09, 0.09, 0.03));
  EXPECT_NEAR(u.mass, 500 * 0.09 * 0.09 * 0.03, 1e-12);
}

TEST(SampleObject, RejectsNonPositiveSize) {
  EXPECT_THROW(MakeObject(ObjectClass::kBox, {0.1, 0.0, 0.1}), InvalidInput);
  EXPECT_THROW(MakeObject(ObjectClass::kPeg, {0.02, 0.1, 0.03}), InvalidInput);
}

TEST(CrossSection, BoxIsRectangle) {
  const Polygon p = CrossSection(UnitaryObject());
  ASSERT_EQ(p.size(), 4u);
  EXPECT_EQ(p[0], Vec2(-0.045, 0.0));
  EXPECT_EQ(p[1], Vec2(0.045, 0.0));
  EXPECT_EQ(p[2], Vec2(0.045, 0.03));
  EXPECT_EQ(p[3], Vec2(-0.045, 0.03));
}

TEST(CrossSection, CylinderIsRegular32Gon) {
  SeededRng rng(4);
  const ObjectSpec s = SampleObject(ObjectClass::kCylinder, rng);
  const Polygon p = CrossSection(s);
  ASSERT_EQ(p.size(), 32u);
  const Vec2 center(0.0, s.size.z() / 2);
  for (const Vec2& v : p) EXPECT_NEAR((v - center).norm(), s.size.z() / 2, 1e-9);
  // Flat bottom facet.
  EXPECT_NEAR(p[0].y(), p[1].y(), 1e-15);
  EXPECT_LT(p[0].x(), p[1].x());
}

TEST(CrossSection, RandomSpecsAreValidConvexPolygons) {
  for (const ObjectSpec& s : RandomSpecs(1000, 5)) {
    const Polygon& p = s.cross_section;
    const double area = PolygonArea(p);
    EXPECT_GT(area, 0.0);
    EXPECT_NEAR(area, FanArea(p), 1e-15);
    EXPECT_TRUE(IsConvexCcw(p));
    const Vec2 c = PolygonCentroid(p);
    EXPECT_TRUE(RayCastInside(p, c));
    EXPECT_TRUE(PointInConvexPolygon(p, c));
    for (const Vec2& v : p) {
      EXPECT_LE(std::abs(v.x()), s.size.x() / 2 + 1e-9);
      EXPECT_GE(v.y(), -1e-9);
      EXPECT_LE(v.y(), s.size.z() + 1e-9);
    }
    EXPECT_GT(s.mass, 0.0);
    EXPECT_GT(s.inertia, 0.0);
  }
}

TEST(CrossSection, MassMatchesDensityTimesVolume) {
  const ObjectSpec cyl = MakeObject(ObjectClass::kCylinder, {0.04, 0.1, 0.04});
  EXPECT_NEAR(cyl.mass, 500 * kPi * 0.02 * 0.02 * 0.1, 1e-12);
  // A 32-gon keeps 99.36% of the disc area.
  EXPECT_NEAR(PolygonArea(cyl.cross_section) / (kPi * 0.02 * 0.02),
              16 * std::sin(2 * kPi / 32) / kPi, 1e-12);
  const ObjectSpec disc = MakeObject(ObjectClass::kCircle, {0.1, 0.1, 0.02});
  EXPECT_NEAR(disc.mass, 500 * kPi * 0.05 * 0.05 * 0.02, 1e-12);
}

TEST(RenderDepth, UnitaryBoxIsFlatTopped) {
  const DepthImage img = RenderDepth(UnitaryObject());
  // |x| <= 0.045 covers offsets -5..5 at 7.8125 mm pitch.
  EXPECT_EQ(img.NonZeroCount(), 11 * 11);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      const bool inside = std::abs(r - 16) <= 5 && std::abs(c - 16) <= 5;
      EXPECT_EQ(img.heights(r, c), inside ? 0.03 : 0.0);
    }
  }
}

TEST(RenderDepth, DiscAreaMatchesPiRSquared) {
  for (double r : {0.03, 0.05, 0.075}) {
    const DepthImage img = RenderDepth(MakeObject(ObjectClass::kCircle, {2 * r, 2 * r, 0.02}));
    const double pixel_area = img.pixel_pitch * img.pixel_pitch;
    EXPECT_NEAR(img.NonZeroCount() * pixel_area / (kPi * r * r), 1.0, 0.05) << r;
  }
}

TEST(RenderDepth, CylinderPeakEqualsDiameter) {
  SeededRng rng(6);
  for (int i = 0; i < 50; ++i) {
    const ObjectSpec s = SampleObject(i % 2 ? ObjectClass::kCylinder : ObjectClass::kPeg, rng);
    const DepthImage img = RenderDepth(s);
    EXPECT_NEAR(img.heights.maxCoeff(), s.size.z(), 1e-4);
  }
}

TEST(RenderDepth, RejectsOversizedFootprint) {
  EXPECT_THROW(RenderDepth(MakeObject(ObjectClass::kBox, {0.30, 0.05, 0.02})),
               InvalidInput);
}

TEST(RenderDepth, NeverNegativeAndFlatTopsReachHeight) {
  for (const ObjectSpec& s : RandomSpecs(400, 7)) {
    const DepthImage img = RenderDepth(s);
    EXPECT_GE(img.heights.minCoeff(), 0.0);
    EXPECT_GT(img.NonZeroCount(), 0);
    EXPECT_NEAR(img.heights.maxCoeff(), s.size.z(), 1e-4);
  }
}

TEST(Augment, IdentityLeavesImageUnchanged) {
  SeededRng rng(8);
  const DepthImage img = RenderDepth(SampleObject(ObjectClass::kCylinder, rng));
  const DepthImage out = ApplyAugmentation(img, AugmentParams{}, rng);
  EXPECT_EQ(out.heights, img.heights);
}

TEST(Augment, QuarterTurnKeepsPixelCount) {
  SeededRng rng(9);
  const DepthImage img = RenderDepth(MakeObject(ObjectClass::kBox, {0.1, 0.1, 0.03}));
  AugmentParams p;
  p.angle = kHalfPi;
  const DepthImage out = ApplyAugmentation(img, p, rng);
  EXPECT_NEAR(out.NonZeroCount(), img.NonZeroCount(), 0.1 * img.NonZeroCount());
}

TEST(Augment, QuarterTurnOfBarSwapsAxes) {
  SeededRng rng(9);
  const DepthImage img = RenderDepth(MakeObject(ObjectClass::kBox, {0.18, 0.03, 0.03}));
  AugmentParams p;
  p.angle = kHalfPi;
  const DepthImage out = ApplyAugmentation(img, p, rng);
  EXPECT_GT(img.heights(16, 26), 0.0);
  EXPECT_EQ(img.heights(26, 16), 0.0);
  EXPECT_GT(out.heights(26, 16), 0.0);
  EXPECT_EQ(out.heights(16, 26), 0.0);
}

TEST(Augment, ShiftMovesContent) {
  SeededRng rng(10);
  const DepthImage img = RenderDepth(UnitaryObject());
  AugmentParams p;
  p.shift_x = 3;
  p.shift_y = -2;
  const DepthImage out = ApplyAugmentation(img, p, rng);
  EXPECT_EQ(out.heights.block(9, 14, 11, 11), img.heights.block(11, 11, 11, 11));
  EXPECT_EQ(out.NonZeroCount(), img.NonZeroCount());
}

TEST(Augment, NoiseMeanAbsMatchesHalfNormal) {
  SeededRng rng(11);
  const DepthImage img = RenderDepth(MakeObject(ObjectClass::kBox, {0.2, 0.15, 0.05}));
  AugmentParams p;
  p.noise_std = 0.002;
  double sum = 0.0;
  int n = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const DepthImage out = ApplyAugmentation(img, p, rng);
    for (int i = 0; i < img.heights.size(); ++i) {
      if (img.heights.data()[i] == 0.0) {
        ASSERT_EQ(out.heights.data()[i], 0.0);
        continue;
      }
      sum += std::abs(out.heights.data()[i] - img.heights.data()[i]);
      ++n;
    }
  }
  EXPECT_NEAR(sum / n, 0.002 * std::sqrt(2 / kPi), 0.2 * 0.002 * std::sqrt(2 / kPi));
}

TEST(Augment, RandomAugmentationKeepsValuesValid) {
  SeededRng rng(12);
  for (const ObjectSpec& s : RandomSpecs(100, 13)) {
    const DepthImage out = Augment(RenderDepth(s), rng);
    EXPECT_GE(out.heights.minCoeff(), 0.0);
    EXPECT_GT(out.NonZeroCount(), 0);
  }
}

TEST(BuildDataset, FullSizeAndBalancedLabels) {
  SeededRng rng(14);
  const Dataset ds = BuildDataset(rng);
  ASSERT_EQ(ds.entries.size(), 4000u);
  std::array<int, kNumClasses> hist{};
  for (const DatasetEntry& e : ds.entries) ++hist[static_cast<int>(e.object_class)];
  for (int h : hist) EXPECT_EQ(h, 1000);
  // Augmentations share labels with their source object.
  for (std::size_t i = 0; i < ds.entries.size(); i += 10) {
    for (std::size_t k = 1; k < 10; ++k) {
      EXPECT_EQ(ds.entries[i + k].source, ds.entries[i].source);
      EXPECT_EQ(ds.entries[i + k].size, ds.entries[i].size);
      EXPECT_EQ(ds.entries[i + k].object_class, ds.entries[i].object_class);
    }
  }
  // Labels match a regenerated source object.
  const DatasetEntry& e = ds.entries[1230];
  EXPECT_EQ(e.object_class, ObjectClass::kCircle);
  EXPECT_EQ(e.source, 123);
}

TEST(BuildDataset, DeterministicUnderSeed) {
  SeededRng a(15), b(15), c(16);
  const Dataset da = BuildDataset(a, 5, 3), db = BuildDataset(b, 5, 3),
                dc = BuildDataset(c, 5, 3);
  ASSERT_EQ(da.entries.size(), 60u);
  bool any_diff = false;
  for (std::size_t i = 0; i < da.entries.size(); ++i) {
    EXPECT_EQ(da.entries[i].image.heights, db.entries[i].image.heights);
    EXPECT_EQ(da.entries[i].size, db.entries[i].size);
    EXPECT_EQ(da.entries[i].seed, db.entries[i].seed);
    any_diff |= da.entries[i].size != dc.entries[i].size;
  }
  EXPECT_TRUE(any_diff);
}

TEST(BuildDataset, ExportRoundTrips) {
  SeededRng rng(17);
  const Dataset ds = BuildDataset(rng, 2, 2);
  const auto dir = std::filesystem::temp_directory_path() / "pivot_shapes_test_export";
  std::filesystem::remove_all(dir);
  ExportDataset(ds, dir);
  const Dataset back = LoadDataset(dir);
  ASSERT_EQ(back.entries.size(), ds.entries.size());
  for (std::size_t i = 0; i < ds.entries.size(); ++i) {
    EXPECT_LE((back.entries[i].image.heights - ds.entries[i].image.heights)
                  .cwiseAbs()
                  .maxCoeff(),
              0.5e-4 + 1e-12);
    EXPECT_EQ(back.entries[i].object_class, ds.entries[i].object_class);
    EXPECT_EQ(back.entries[i].size, ds.entries[i].size);
    EXPECT_EQ(back.entries[i].seed, ds.entries[i].seed);
    EXPECT_EQ(back.entries[i].source, ds.entries[i].source);
  }
  std::filesystem::remove_all(dir);
}

TEST(BuildDataset, LoadReportsMissingManifest) {
  EXPECT_THROW(LoadDataset("/nonexistent/pivot/dataset"), MissingArtifact);
}

TEST(ClassNames, RoundTrip) {
  for (int c = 0; c < kNumClasses; ++c) {
    EXPECT_EQ(static_cast<int>(ClassFromName(ClassName(static_cast<ObjectClass>(c)))), c);
  }
  EXPECT_THROW(ClassFromName("sphere"), InvalidInput);
}

}  // namespace
}  // namespace pivot
