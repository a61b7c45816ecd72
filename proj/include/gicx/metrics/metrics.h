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

#ifndef GICX_METRICS_METRICS_H_
#define GICX_METRICS_METRICS_H_

#include <limits>
#include <string>
#include <vector>

#include "gicx/codec/bitstream.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

// Returned by Psnr for identical images.
inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

// 10 log10(peak^2 / MSE). Throws DimensionError on shape mismatch and
// ParameterError for a non-positive peak.
double Psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

// Single-scale SSIM on luma (0.299 R + 0.587 G + 0.114 B; single-channel
// inputs are used as-is). 11x11 Gaussian window with sigma 1.5, valid region
// only, K1 = 0.01, K2 = 0.03, dynamic range 1. Throws ParameterError when an
// image is smaller than the window.
double Ssim(const Tensor& a, const Tensor& b);

// Luma plane of a 3 x H x W image as a 1 x H x W tensor.
Tensor Luma(const Tensor& image);

struct ImageQuality {
  std::string name;
  double psnr = 0.0;
  double ssim = 0.0;
  double bpp = 0.0;
};

struct QualityReport {
  std::vector<ImageQuality> images;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  BitrateStats bitrate;
};

// Fills corpus means and bitrate statistics from `images`.
QualityReport SummarizeQuality(std::vector<ImageQuality> images);

}  // namespace gicx

#endif  // GICX_METRICS_METRICS_H_
