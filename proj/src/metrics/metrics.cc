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

#include "gicx/metrics/metrics.h"

#include <array>
#include <cmath>

#include "gicx/numerics/errors.h"

namespace gicx {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> GaussianWindow() {
  std::array<double, kWindow> w{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

// Separable valid-mode filtering of an H x W plane.
std::vector<double> Filter(const std::vector<double>& src, int64_t h, int64_t w) {
  static const auto kWin = GaussianWindow();
  const int64_t ho = h - kWindow + 1, wo = w - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h * wo));
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < wo; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += kWin[k] * src[y * w + x + k];
      rows[y * wo + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(ho * wo));
  for (int64_t y = 0; y < ho; ++y)
    for (int64_t x = 0; x < wo; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += kWin[k] * rows[(y + k) * wo + x];
      out[y * wo + x] = acc;
    }
  return out;
}

}  // namespace

double Psnr(const Tensor& a, const Tensor& b, double peak) {
  if (a.shape() != b.shape()) {
    throw DimensionError("psnr: " + ShapeToString(a.shape()) + " vs " + ShapeToString(b.shape()));
  }
  if (!(peak > 0.0)) throw ParameterError("psnr peak must be positive");
  if (a.numel() == 0) throw DimensionError("psnr of empty images");
  double se = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    const double d = a[i] - b[i];
    se += d * d;
  }
  if (se == 0.0) return kPsnrInfinity;
  const double mse = se / static_cast<double>(a.numel());
  return 10.0 * std::log10(peak * peak / mse);
}

Tensor Luma(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError("luma needs a 3 x H x W image, got " + ShapeToString(image.shape()));
  }
  const int64_t plane = image.dim(1) * image.dim(2);
  std::vector<double> y(static_cast<std::size_t>(plane));
  auto d = image.data();
  for (int64_t i = 0; i < plane; ++i) {
    y[i] = 0.299 * d[i] + 0.587 * d[plane + i] + 0.114 * d[2 * plane + i];
  }
  return Tensor({1, image.dim(1), image.dim(2)}, std::move(y));
}

double Ssim(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("ssim: " + ShapeToString(a.shape()) + " vs " + ShapeToString(b.shape()));
  }
  if (a.rank() != 3 || (a.dim(0) != 1 && a.dim(0) != 3)) {
    throw DimensionError("ssim needs a 1 or 3 channel image");
  }
  const int64_t h = a.dim(1), w = a.dim(2);
  if (h < kWindow || w < kWindow) {
    throw ParameterError("ssim: image " + ShapeToString(a.shape()) + " smaller than the 11x11 window");
  }
  const Tensor ya = a.dim(0) == 3 ? Luma(a) : a;
  const Tensor yb = b.dim(0) == 3 ? Luma(b) : b;
  const std::vector<double> x(ya.data().begin(), ya.data().end());
  const std::vector<double> y(yb.data().begin(), yb.data().end());
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = Filter(x, h, w), my = Filter(y, h, w);
  const auto sxx = Filter(xx, h, w), syy = Filter(yy, h, w), sxy = Filter(xy, h, w);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cxy = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + kC1) * (2.0 * cxy + kC2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2));
  }
  return total / static_cast<double>(mx.size());
}

QualityReport SummarizeQuality(std::vector<ImageQuality> images) {
  QualityReport r;
  r.images = std::move(images);
  if (r.images.empty()) return r;
  std::vector<double> bpp;
  for (const auto& q : r.images) {
    r.mean_psnr += q.psnr;
    r.mean_ssim += q.ssim;
    bpp.push_back(q.bpp);
  }
  r.mean_psnr /= static_cast<double>(r.images.size());
  r.mean_ssim /= static_cast<double>(r.images.size());
  r.bitrate = SummarizeBpp(std::move(bpp));
  return r;
}

}  // namespace gicx
