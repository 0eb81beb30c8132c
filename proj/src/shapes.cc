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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pivot/core_math.h"
#include "pivot/errors.h"

namespace pivot {
namespace {

constexpr int kCenterPixel = DepthImage::kSize / 2;
constexpr double kPgmScale = 10000.0;

struct SizeRange {
  double lo, hi;
};

// Sampling ranges per class.
constexpr SizeRange kBoxX{0.04, 0.20}, kBoxY{0.01, 0.15}, kBoxZ{0.01, 0.06};
constexpr SizeRange kDiscDiameter{0.04, 0.15}, kDiscHeight{0.01, 0.04};
constexpr SizeRange kCylDiameter{0.03, 0.06}, kCylLength{0.04, 0.15};
constexpr SizeRange kPegDiameter{0.015, 0.03};
constexpr double kPegMinLength = 0.06, kPegMaxLength = 0.15;

double Draw(SeededRng& rng, SizeRange r) { return SampleUniform(rng, r.lo, r.hi); }

double Cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

Polygon Rectangle(double lx, double lz) {
  return {{-lx / 2, 0.0}, {lx / 2, 0.0}, {lx / 2, lz}, {-lx / 2, lz}};
}

// Regular n-gon with a flat bottom facet, centered at (0, d/2).
Polygon RoundSection(double d) {
  const double r = d / 2;
  Polygon out;
  out.reserve(kCircleSegments);
  const double step = 2 * kPi / kCircleSegments;
  for (int k = 0; k < kCircleSegments; ++k) {
    const double phi = -kHalfPi - step / 2 + step * k;
    out.emplace_back(r * std::cos(phi), r + r * std::sin(phi));
  }
  return out;
}

double FootprintHeight(const ObjectSpec& s, double x, double y) {
  const double lx = s.size.x(), ly = s.size.y(), lz = s.size.z();
  switch (s.object_class) {
    case ObjectClass::kBox:
      return (std::abs(x) <= lx / 2 && std::abs(y) <= ly / 2) ? lz : 0.0;
    case ObjectClass::kCircle:
      return (x * x + y * y <= lx * lx / 4) ? lz : 0.0;
    case ObjectClass::kCylinder:
    case ObjectClass::kPeg: {
      const double r = lz / 2;
      if (std::abs(y) > ly / 2 || std::abs(x) > r) return 0.0;
      return r + std::sqrt(std::max(0.0, r * r - x * x));
    }
  }
  return 0.0;
}

}  // namespace

std::string ClassName(ObjectClass c) {
  switch (c) {
    case ObjectClass::kBox:
      return "box";
    case ObjectClass::kCircle:
      return "circle";
    case ObjectClass::kCylinder:
      return "cylinder";
    case ObjectClass::kPeg:
      return "peg";
  }
  throw InvalidInput("unknown object class");
}

ObjectClass ClassFromName(const std::string& name) {
  for (int c = 0; c < kNumClasses; ++c) {
    if (ClassName(static_cast<ObjectClass>(c)) == name) {
      return static_cast<ObjectClass>(c);
    }
  }
  throw InvalidInput("unknown object class '" + name + "'");
}

ObjectSpec MakeObject(ObjectClass c, const Eigen::Vector3d& size,
                      const Friction& friction) {
  if (!(size.minCoeff() > 0.0)) throw InvalidInput("object sizes must be positive");
  ObjectSpec s;
  s.object_class = c;
  s.size = size;
  s.friction = friction;
  const double lx = size.x(), ly = size.y(), lz = size.z();
  switch (c) {
    case ObjectClass::kBox:
      s.mass = kDensity * lx * ly * lz;
      s.inertia = s.mass * (lx * lx + lz * lz) / 12.0;
      break;
    case ObjectClass::kCircle: {
      const double r = lx / 2;
      s.mass = kDensity * kPi * r * r * lz;
      s.inertia = s.mass * (3 * r * r + lz * lz) / 12.0;
      break;
    }
    case ObjectClass::kCylinder:
    case ObjectClass::kPeg: {
      if (std::abs(lx - lz) > 1e-12) {
        throw InvalidInput("round objects need l_x == l_z");
      }
      const double r = lz / 2;
      s.mass = kDensity * kPi * r * r * ly;
      s.inertia = s.mass * r * r / 2.0;
      break;
    }
  }
  s.cross_section = CrossSection(s);
  return s;
}

ObjectSpec UnitaryObject() {
  return MakeObject(ObjectClass::kBox, {0.09, 0.09, 0.03});
}

ObjectSpec SampleObject(ObjectClass c, SeededRng& rng) {
  switch (c) {
    case ObjectClass::kBox: {
      double lx = Draw(rng, kBoxX), ly = Draw(rng, kBoxY);
      const double lz = Draw(rng, kBoxZ);
      // Long side goes in the pivot plane.
      if (lx < ly) std::swap(lx, ly);
      return MakeObject(c, {lx, ly, lz});
    }
    case ObjectClass::kCircle: {
      const double d = Draw(rng, kDiscDiameter), h = Draw(rng, kDiscHeight);
      return MakeObject(c, {d, d, h});
    }
    case ObjectClass::kCylinder: {
      const double d = Draw(rng, kCylDiameter), len = Draw(rng, kCylLength);
      return MakeObject(c, {d, len, d});
    }
    case ObjectClass::kPeg: {
      const double d = Draw(rng, kPegDiameter);
      const double len = SampleUniform(rng, std::max(kPegMinLength, 2 * d), kPegMaxLength);
      return MakeObject(c, {d, len, d});
    }
  }
  throw InvalidInput("unknown object class");
}

std::vector<ObjectSpec> SampleObjectPool(SeededRng& rng, int per_class) {
  std::vector<ObjectSpec> out;
  for (int c = 0; c < kNumClasses; ++c) {
    for (int i = 0; i < per_class; ++i) {
      out.push_back(SampleObject(static_cast<ObjectClass>(c), rng));
    }
  }
  return out;
}

Polygon CrossSection(const ObjectSpec& spec) {
  switch (spec.object_class) {
    case ObjectClass::kBox:
    case ObjectClass::kCircle:
      return Rectangle(spec.size.x(), spec.size.z());
    case ObjectClass::kCylinder:
    case ObjectClass::kPeg:
      return RoundSection(spec.size.z());
  }
  throw InvalidInput("unknown object class");
}

double PolygonArea(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    a += Cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * a;
}

Vec2 PolygonCentroid(const Polygon& poly) {
  const double area = PolygonArea(poly);
  if (area == 0.0) throw InvalidInput("PolygonCentroid: degenerate polygon");
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    c += (p + q) * Cross(p, q);
  }
  return c / (6.0 * area);
}

bool IsConvexCcw(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = poly[(i + 1) % n] - poly[i];
    const Vec2 e1 = poly[(i + 2) % n] - poly[(i + 1) % n];
    if (!(Cross(e0, e1) > 0.0)) return false;
  }
  return true;
}

bool PointInConvexPolygon(const Polygon& poly, const Vec2& p) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    if (Cross(b - a, p - a) < -1e-15) return false;
  }
  return true;
}

int DepthImage::NonZeroCount() const {
  return static_cast<int>((heights.array() != 0.0).count());
}

DepthImage RenderDepth(const ObjectSpec& spec) {
  const double limit = (kCenterPixel - 0.5) * DepthImage::kPixelPitch;
  const double half_x = spec.size.x() / 2, half_y = spec.size.y() / 2;
  if (half_x > limit || half_y > limit) {
    throw InvalidInput("RenderDepth: object footprint exceeds the field of view");
  }
  DepthImage img;
  for (int r = 0; r < DepthImage::kSize; ++r) {
    const double y = (r - kCenterPixel) * img.pixel_pitch;
    for (int c = 0; c < DepthImage::kSize; ++c) {
      const double x = (c - kCenterPixel) * img.pixel_pitch;
      img.heights(r, c) = FootprintHeight(spec, x, y);
    }
  }
  return img;
}

DepthImage ApplyAugmentation(const DepthImage& img, const AugmentParams& params,
                             SeededRng& rng) {
  if (params.noise_std < 0.0) throw InvalidInput("augment: negative noise std");
  DepthImage out;
  out.pixel_pitch = img.pixel_pitch;
  const double ca = std::cos(params.angle), sa = std::sin(params.angle);
  const int n = DepthImage::kSize;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      // Inverse map: undo the shift, then rotate back by -angle.
      const double u = c - kCenterPixel - params.shift_x;
      const double v = r - kCenterPixel - params.shift_y;
      const long sc = std::lround(ca * u + sa * v) + kCenterPixel;
      const long sr = std::lround(-sa * u + ca * v) + kCenterPixel;
      if (sc < 0 || sc >= n || sr < 0 || sr >= n) continue;
      out.heights(r, c) = img.heights(sr, sc);
    }
  }
  if (params.noise_std > 0.0) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        double& h = out.heights(r, c);
        if (h == 0.0) continue;
        h = std::max(0.0, h + SampleGaussian(rng, 0.0, params.noise_std));
      }
    }
  }
  return out;
}

DepthImage Augment(const DepthImage& img, SeededRng& rng) {
  AugmentParams p;
  p.angle = SampleUniform(rng, 0.0, 2 * kPi);
  p.shift_x = static_cast<int>(rng.NextBelow(2 * kMaxShiftPixels + 1)) - kMaxShiftPixels;
  p.shift_y = static_cast<int>(rng.NextBelow(2 * kMaxShiftPixels + 1)) - kMaxShiftPixels;
  p.noise_std = kAugmentNoiseStd;
  return ApplyAugmentation(img, p, rng);
}

Dataset BuildDataset(SeededRng& rng, int per_class, int augmentations) {
  if (per_class <= 0 || augmentations <= 0) {
    throw InvalidInput("BuildDataset: counts must be positive");
  }
  const SeededRng base(rng.NextU64());
  Dataset ds;
  ds.entries.reserve(static_cast<std::size_t>(kNumClasses * per_class * augmentations));
  int source = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    for (int i = 0; i < per_class; ++i, ++source) {
      SeededRng obj_rng = base.Split(2 * static_cast<std::uint64_t>(source));
      const ObjectSpec spec = SampleObject(static_cast<ObjectClass>(c), obj_rng);
      const DepthImage original = RenderDepth(spec);
      const SeededRng aug_base = base.Split(2 * static_cast<std::uint64_t>(source) + 1);
      for (int k = 0; k < augmentations; ++k) {
        SeededRng aug_rng = aug_base.Split(static_cast<std::uint64_t>(k));
        DatasetEntry e;
        e.seed = aug_rng.seed();
        e.image = Augment(original, aug_rng);
        e.object_class = spec.object_class;
        e.size = spec.size;
        e.source = source;
        ds.entries.push_back(std::move(e));
      }
    }
  }
  return ds;
}

void WritePgm16(const DepthImage& img, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  const int n = DepthImage::kSize;
  f << "P5\n" << n << " " << n << "\n65535\n";
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double q = std::clamp(std::round(img.heights(r, c) * kPgmScale), 0.0, 65535.0);
      const auto v = static_cast<std::uint16_t>(q);
      const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
      f.write(bytes, 2);
    }
  }
}

DepthImage ReadPgm16(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingArtifact("missing image " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  f >> magic >> w >> h >> maxval;
  if (magic != "P5" || w != DepthImage::kSize || h != DepthImage::kSize ||
      maxval != 65535) {
    throw ParseError("bad PGM header in " + path.string());
  }
  f.get();  // single whitespace after maxval
  DepthImage img;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      unsigned char bytes[2];
      if (!f.read(reinterpret_cast<char*>(bytes), 2)) {
        throw ParseError("truncated PGM " + path.string());
      }
      img.heights(r, c) = ((bytes[0] << 8) | bytes[1]) / kPgmScale;
    }
  }
  return img;
}

void ExportDataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "pivot-dataset-1";
  manifest["image_size"] = DepthImage::kSize;
  manifest["pixel_pitch"] = DepthImage::kPixelPitch;
  manifest["height_scale"] = kPgmScale;
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < dataset.entries.size(); ++i) {
    const DatasetEntry& e = dataset.entries[i];
    char name[32];
    std::snprintf(name, sizeof(name), "img_%05zu.pgm", i);
    WritePgm16(e.image, dir / name);
    entries.push_back({{"file", name},
                       {"class", ClassName(e.object_class)},
                       {"size", {e.size.x(), e.size.y(), e.size.z()}},
                       {"source", e.source},
                       {"seed", e.seed}});
  }
  manifest["entries"] = std::move(entries);
  std::ofstream f(dir / "manifest.json");
  f << manifest.dump(1) << "\n";
}

Dataset LoadDataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream f(manifest_path);
  if (!f) throw MissingArtifact("missing dataset manifest " + manifest_path.string());
  nlohmann::json manifest;
  try {
    f >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad dataset manifest: " + std::string(e.what()));
  }
  Dataset ds;
  try {
    for (const auto& j : manifest.at("entries")) {
      DatasetEntry e;
      e.image = ReadPgm16(dir / j.at("file").get<std::string>());
      e.object_class = ClassFromName(j.at("class").get<std::string>());
      const auto size = j.at("size").get<std::vector<double>>();
      if (size.size() != 3) throw ParseError("size must have 3 entries");
      e.size = {size[0], size[1], size[2]};
      e.source = j.at("source").get<int>();
      e.seed = j.at("seed").get<std::uint64_t>();
      ds.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad dataset manifest: " + std::string(e.what()));
  }
  return ds;
}

}  // namespace pivot
