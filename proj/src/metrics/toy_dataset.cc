/* Copyright 2026 The Gicx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "gicx/metrics/toy_dataset.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "gicx/metrics/image_io.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/random.h"

namespace gicx {

namespace {

using Color = std::array<double, 3>;

Color RandomColor(Rng& rng) { return {rng.Uniform(), rng.Uniform(), rng.Uniform()}; }

struct Canvas {
  int h, w;
  std::vector<double> px;  // channel-major
  Canvas(int h_, int w_) : h(h_), w(w_), px(static_cast<std::size_t>(3 * h_ * w_), 0.0) {}
  double& at(int c, int y, int x) { return px[(static_cast<std::size_t>(c) * h + y) * w + x]; }
  Tensor ToTensor() {
    for (double& v : px) v = std::clamp(v, 0.0, 1.0);
    return Tensor({3, h, w}, px);
  }
};

void PaintGradient(Canvas& cv, Rng& rng) {
  const Color a = RandomColor(rng), b = RandomColor(rng);
  const double angle = 2.0 * std::numbers::pi * rng.Uniform();
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double bend = 0.6 * (rng.Uniform() - 0.5);
  for (int y = 0; y < cv.h; ++y)
    for (int x = 0; x < cv.w; ++x) {
      const double u = (x + 0.5) / cv.w - 0.5, v = (y + 0.5) / cv.h - 0.5;
      double s = 0.5 + (u * dx + v * dy) + bend * (u * u + v * v);
      s = std::clamp(s, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) cv.at(c, y, x) = a[c] * (1.0 - s) + b[c] * s;
    }
}

// Coverage of a pixel by a shape from its signed distance, one-pixel ramp.
double Coverage(double signed_distance) { return std::clamp(0.5 - signed_distance, 0.0, 1.0); }

void PaintShapes(Canvas& cv, Rng& rng) {
  PaintGradient(cv, rng);
  const int shapes = 1 + static_cast<int>(rng.UniformInt(0, 3));
  const double scale = std::min(cv.h, cv.w);
  for (int s = 0; s < shapes; ++s) {
    const Color col = RandomColor(rng);
    const bool circle = rng.Bernoulli(0.5);
    const double cx = cv.w * rng.Uniform(), cy = cv.h * rng.Uniform();
    const double rx = scale * (0.12 + 0.25 * rng.Uniform());
    const double ry = circle ? rx : scale * (0.12 + 0.25 * rng.Uniform());
    for (int y = 0; y < cv.h; ++y)
      for (int x = 0; x < cv.w; ++x) {
        const double px = x + 0.5 - cx, py = y + 0.5 - cy;
        const double d = circle ? std::hypot(px, py) - rx
                                : std::max(std::abs(px) - rx, std::abs(py) - ry);
        const double a = Coverage(d);
        for (int c = 0; c < 3; ++c) cv.at(c, y, x) = cv.at(c, y, x) * (1.0 - a) + col[c] * a;
      }
  }
}

void PaintTexture(Canvas& cv, Rng& rng) {
  const Color base = RandomColor(rng);
  const double amplitude = 0.15 + 0.2 * rng.Uniform();
  for (int c = 0; c < 3; ++c) {
    constexpr int kWaves = 6;
    std::array<double, kWaves> fx{}, fy{}, phase{}, weight{};
    for (int k = 0; k < kWaves; ++k) {
      // Frequencies up to 4 cycles per image keep the texture band-limited.
      fx[k] = 4.0 * (rng.Uniform() - 0.5) * 2.0;
      fy[k] = 4.0 * (rng.Uniform() - 0.5) * 2.0;
      phase[k] = 2.0 * std::numbers::pi * rng.Uniform();
      weight[k] = 0.5 + rng.Uniform();
    }
    double wsum = 0.0;
    for (double w : weight) wsum += w;
    for (int y = 0; y < cv.h; ++y)
      for (int x = 0; x < cv.w; ++x) {
        double v = 0.0;
        for (int k = 0; k < kWaves; ++k) {
          v += weight[k] *
               std::sin(2.0 * std::numbers::pi * (fx[k] * x / cv.w + fy[k] * y / cv.h) + phase[k]);
        }
        cv.at(c, y, x) = base[c] + amplitude * v / wsum * 2.0;
      }
  }
}

}  // namespace

ToyKind ParseToyKind(const std::string& name) {
  if (name == "gradients") return ToyKind::kGradients;
  if (name == "shapes") return ToyKind::kShapes;
  if (name == "textures") return ToyKind::kTextures;
  if (name == "mixed") return ToyKind::kMixed;
  throw ParameterError("unknown dataset kind '" + name + "'");
}

std::string ToyKindName(ToyKind kind) {
  switch (kind) {
    case ToyKind::kGradients: return "gradients";
    case ToyKind::kShapes: return "shapes";
    case ToyKind::kTextures: return "textures";
    case ToyKind::kMixed: return "mixed";
  }
  return "mixed";
}

std::vector<Tensor> GenerateToyDataset(const ToyDatasetSpec& spec) {
  if (spec.count < 0) throw ParameterError("dataset count must be non-negative");
  if (spec.height <= 0 || spec.width <= 0 || spec.height % 4 != 0 || spec.width % 4 != 0) {
    throw ParameterError("dataset resolution must be a positive multiple of 4");
  }
  Rng master(spec.seed);
  std::vector<Tensor> images;
  images.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(master.Fork());
    ToyKind kind = spec.kind;
    if (kind == ToyKind::kMixed) {
      kind = std::array{ToyKind::kGradients, ToyKind::kShapes, ToyKind::kTextures}[i % 3];
    }
    Canvas cv(spec.height, spec.width);
    switch (kind) {
      case ToyKind::kGradients: PaintGradient(cv, rng); break;
      case ToyKind::kShapes: PaintShapes(cv, rng); break;
      default: PaintTexture(cv, rng); break;
    }
    images.push_back(cv.ToTensor());
  }
  return images;
}

std::vector<std::string> WriteToyDataset(const ToyDatasetSpec& spec, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  const auto images = GenerateToyDataset(spec);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%03zu.ppm", i);
    const std::string path = (std::filesystem::path(dir) / name).string();
    WritePpm(path, images[i]);
    paths.push_back(path);
  }
  return paths;
}

std::vector<std::string> ListImages(const std::string& dir) {
  std::vector<std::string> paths;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
      paths.push_back(entry.path().string());
    }
  }
  if (ec) throw IoError("cannot read directory " + dir);
  if (paths.empty()) throw IoError("no .ppm images in " + dir);
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace gicx
