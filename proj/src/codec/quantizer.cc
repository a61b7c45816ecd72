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

#include "gicx/codec/quantizer.h"

#include <algorithm>
#include <cmath>

#include "gicx/numerics/errors.h"

namespace gicx {

void QuantizerSpec::Validate() const {
  if (levels < 2) throw ParameterError("quantizer needs at least 2 levels");
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) {
    throw ParameterError("quantizer range must satisfy min < max");
  }
}

uint32_t QuantizeIndex(double value, const QuantizerSpec& q) {
  const double pos = std::floor((value - q.min) / q.step() + 0.5);
  if (!(pos > 0.0)) return 0;  // also catches NaN
  if (pos >= static_cast<double>(q.levels - 1)) return q.levels - 1;
  return static_cast<uint32_t>(pos);
}

double DequantizeIndex(uint32_t index, const QuantizerSpec& q) {
  if (index >= q.levels - 1) return q.max;
  return q.min + static_cast<double>(index) * q.step();
}

std::vector<uint32_t> Quantize(std::span<const double> values, const QuantizerSpec& q) {
  q.Validate();
  std::vector<uint32_t> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [&q](double v) { return QuantizeIndex(v, q); });
  return out;
}

std::vector<double> Dequantize(std::span<const uint32_t> indices, const QuantizerSpec& q) {
  q.Validate();
  std::vector<double> out(indices.size());
  std::transform(indices.begin(), indices.end(), out.begin(),
                 [&q](uint32_t i) { return DequantizeIndex(i, q); });
  return out;
}

QuantizerSpec FitQuantizer(std::span<const double> values, uint32_t levels) {
  QuantizerSpec q{0.0, 1.0, levels};
  if (!values.empty()) {
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    q.min = *lo;
    q.max = *hi > *lo ? *hi : *lo + 1.0;
  }
  q.Validate();
  return q;
}

}  // namespace gicx
