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

#ifndef GICX_CODEC_GUIDANCE_CODEC_H_
#define GICX_CODEC_GUIDANCE_CODEC_H_

#include <cstdint>
#include <vector>

#include "gicx/codec/quantizer.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

inline constexpr int kGuidanceDownsample = 4;

struct CompressedGuidance {
  std::vector<uint8_t> payload;
  // One quantizer per channel, fitted to that channel's downsampled range.
  std::vector<QuantizerSpec> quantizers;
  // Decoded reference, C x H/4 x W/4.
  Tensor reference;
};

// x4 average pooling per channel. Throws ParameterError unless H and W are
// divisible by 4.
Tensor DownsampleForGuidance(const Tensor& image);

// Downsample, quantize each channel with `levels` levels over its own range,
// and range-code all channels as one stream.
CompressedGuidance CompressGuidanceImage(const Tensor& image, uint32_t levels);

// Inverse of the payload half of CompressGuidanceImage.
Tensor DecompressGuidanceImage(std::span<const uint8_t> payload,
                               const std::vector<QuantizerSpec>& quantizers, int64_t height,
                               int64_t width);

}  // namespace gicx

#endif  // GICX_CODEC_GUIDANCE_CODEC_H_
