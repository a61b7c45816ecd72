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

#ifndef GICX_INVERSION_INVERSION_H_
#define GICX_INVERSION_INVERSION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "gicx/backbone/model.h"
#include "gicx/codec/quantizer.h"
#include "gicx/numerics/random.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

// Named embedding shapes and step counts.
struct InversionPreset {
  int tokens;
  int dims;
  int steps;
};
inline constexpr InversionPreset kToyInversionPreset{8, 32, 500};
inline constexpr InversionPreset kPaperInversionPreset{64, 768, 4000};

struct InversionConfig {
  int steps = 500;
  double learning_rate = 0.02;
  bool quantize_in_loop = true;
  // Grid for the in-loop quantizer and for the shipped embedding. An empty
  // range (min == max == 0) means DefaultEmbeddingQuantizer(model).
  QuantizerSpec quantizer{0.0, 0.0, 256};
  // (t, eps) draws averaged per step.
  int draws_per_step = 1;
  uint64_t seed = 0;

  // Throws ParameterError unless steps >= 1, draws_per_step >= 1 and the
  // learning rate is positive.
  void Validate() const;
};

struct InversionResult {
  Tensor initial;    // starting embedding
  Tensor embedding;  // continuous e_x after the last step
  Tensor quantized;  // quantize(e_x), the embedding that ships
  QuantizerSpec quantizer;
  std::vector<int> t;         // timestep of the first draw of each step
  std::vector<double> loss;   // loss of each step

  // step,t,loss rows after a header line.
  std::string LossCsv() const;
};

// 256 levels over descriptor mean +/- 5 descriptor standard deviations.
QuantizerSpec DefaultEmbeddingQuantizer(const Model& model, uint32_t levels = 256);

// N(descriptor_mean, descriptor_std^2) entries, tokens x dims.
Tensor InitialEmbedding(const Model& model, Rng& rng);

// Forward: nearest grid value. Backward: gradient passed through unchanged.
Tensor StraightThroughQuantize(const Tensor& e, const QuantizerSpec& q);

// Learns e_x for `image` by Adam on mean((eps - net(z_t, t, q(e_x)))^2) with
// fresh (t, eps) draws each step. The model is frozen for the duration (and
// left frozen); only e_x is updated. Throws ParameterError if the image
// does not match the model resolution.
InversionResult InvertEmbedding(Model& model, const Tensor& image, const InversionConfig& config);

// Monte-Carlo estimate of the denoising loss of `embedding` on `image` over
// `trials` (t, eps) draws from `seed`. Equal seeds give paired draws.
double EmbeddingLoss(const Model& model, const Tensor& image, const Tensor& embedding, int trials,
                     uint64_t seed);

struct UtilityReport {
  int trials = 0;
  double learned_mean = 0.0;
  double random_mean = 0.0;
  double relative_gap = 0.0;  // (random - learned) / random
  bool high_variance = false; // fewer than 2 trials
  bool pass = false;          // learned < random
};

UtilityReport EmbeddingUtilityCheck(const Model& model, const Tensor& image,
                                    const Tensor& learned, const Tensor& random, int trials,
                                    uint64_t seed);

}  // namespace gicx

#endif  // GICX_INVERSION_INVERSION_H_
