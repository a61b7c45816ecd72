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

#ifndef GICX_CODEC_QUANTIZER_H_
#define GICX_CODEC_QUANTIZER_H_

#include <cstdint>
#include <span>
#include <vector>

namespace gicx {

// Uniform scalar quantizer over [min, max] with `levels` grid points
// (min, min + step, ..., max).
struct QuantizerSpec {
  double min = 0.0;
  double max = 1.0;
  uint32_t levels = 256;

  double step() const { return (max - min) / static_cast<double>(levels - 1); }
  // Throws ParameterError unless min < max, both finite, and levels >= 2.
  void Validate() const;

  bool operator==(const QuantizerSpec&) const = default;
};

// Nearest grid index, halves rounded up, clamped to [0, levels - 1].
uint32_t QuantizeIndex(double value, const QuantizerSpec& q);
double DequantizeIndex(uint32_t index, const QuantizerSpec& q);
// Grid point nearest to `value`.
inline double QuantizeValue(double value, const QuantizerSpec& q) {
  return DequantizeIndex(QuantizeIndex(value, q), q);
}

std::vector<uint32_t> Quantize(std::span<const double> values, const QuantizerSpec& q);
std::vector<double> Dequantize(std::span<const uint32_t> indices, const QuantizerSpec& q);

// Quantizer spanning the data's own [min, max]. A constant input gets a unit
// wide range starting at that constant so it maps to index 0 exactly.
QuantizerSpec FitQuantizer(std::span<const double> values, uint32_t levels);

}  // namespace gicx

#endif  // GICX_CODEC_QUANTIZER_H_
