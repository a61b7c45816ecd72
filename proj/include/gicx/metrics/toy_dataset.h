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

#ifndef GICX_METRICS_TOY_DATASET_H_
#define GICX_METRICS_TOY_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "gicx/numerics/tensor.h"

namespace gicx {

enum class ToyKind { kGradients, kShapes, kTextures, kMixed };

struct ToyDatasetSpec {
  int count = 24;
  int height = 32;
  int width = 32;
  uint64_t seed = 1;
  ToyKind kind = ToyKind::kMixed;
};

ToyKind ParseToyKind(const std::string& name);
std::string ToyKindName(ToyKind kind);

// Seed-deterministic procedural images in [0, 1]: smooth colour gradients,
// anti-aliased random shapes, and band-limited noise textures. kMixed cycles
// through the three. Throws ParameterError unless both sides are positive
// multiples of 4.
std::vector<Tensor> GenerateToyDataset(const ToyDatasetSpec& spec);

// Writes img_000.ppm, img_001.ppm, ... into `dir` (created if missing) and
// returns the paths.
std::vector<std::string> WriteToyDataset(const ToyDatasetSpec& spec, const std::string& dir);

// Sorted list of *.ppm files in `dir`. Throws IoError if none are found.
std::vector<std::string> ListImages(const std::string& dir);

}  // namespace gicx

#endif  // GICX_METRICS_TOY_DATASET_H_
