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

#include "gicx/codec/guidance_codec.h"

#include "gicx/codec/range_coder.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"

namespace gicx {

Tensor DownsampleForGuidance(const Tensor& image) {
  if (image.rank() != 3) throw DimensionError("guidance image must be CxHxW");
  if (image.dim(1) % kGuidanceDownsample != 0 || image.dim(2) % kGuidanceDownsample != 0) {
    throw ParameterError("image dimensions " + ShapeToString(image.shape()) +
                         " are not divisible by 4");
  }
  NoGradGuard no_grad;
  return AvgPool2d(image, kGuidanceDownsample);
}

CompressedGuidance CompressGuidanceImage(const Tensor& image, uint32_t levels) {
  Tensor small = DownsampleForGuidance(image);
  const int64_t channels = small.dim(0);
  const std::size_t plane = static_cast<std::size_t>(small.dim(1) * small.dim(2));
  auto values = small.data();

  CompressedGuidance out;
  std::vector<uint32_t> symbols;
  symbols.reserve(values.size());
  std::vector<double> decoded;
  decoded.reserve(values.size());
  for (int64_t c = 0; c < channels; ++c) {
    auto channel = values.subspan(static_cast<std::size_t>(c) * plane, plane);
    QuantizerSpec q = FitQuantizer(channel, levels);
    for (double v : channel) {
      const uint32_t idx = QuantizeIndex(v, q);
      symbols.push_back(idx);
      decoded.push_back(DequantizeIndex(idx, q));
    }
    out.quantizers.push_back(q);
  }
  out.payload = RangeEncode(symbols, {.alphabet_size = levels});
  out.reference = Tensor(small.shape(), std::move(decoded));
  return out;
}

Tensor DecompressGuidanceImage(std::span<const uint8_t> payload,
                               const std::vector<QuantizerSpec>& quantizers, int64_t height,
                               int64_t width) {
  if (quantizers.empty()) throw ParameterError("guidance image needs at least one channel");
  const uint32_t levels = quantizers.front().levels;
  for (const auto& q : quantizers) {
    q.Validate();
    if (q.levels != levels) throw ParameterError("guidance channels must share a level count");
  }
  const std::size_t plane = static_cast<std::size_t>(height * width);
  auto symbols = RangeDecode(payload, plane * quantizers.size(), {.alphabet_size = levels});
  std::vector<double> values(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    values[i] = DequantizeIndex(symbols[i], quantizers[i / plane]);
  }
  return Tensor({static_cast<int64_t>(quantizers.size()), height, width}, std::move(values));
}

}  // namespace gicx
