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

#ifndef GICX_METRICS_IMAGE_IO_H_
#define GICX_METRICS_IMAGE_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gicx/numerics/tensor.h"

namespace gicx {

// Images are 3 x H x W tensors with values in [0, 1].

// Binary portable pixmap (P6, maxval 255). Values are clamped and rounded to
// the nearest 8-bit level.
std::vector<uint8_t> EncodePpm(const Tensor& image);
Tensor DecodePpm(std::span<const uint8_t> bytes);

void WritePpm(const std::string& path, const Tensor& image);
Tensor ReadPpm(const std::string& path);

// Clamps every value to [0, 1].
Tensor ClampImage(const Tensor& image);

}  // namespace gicx

#endif  // GICX_METRICS_IMAGE_IO_H_
