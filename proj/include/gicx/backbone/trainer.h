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

#ifndef GICX_BACKBONE_TRAINER_H_
#define GICX_BACKBONE_TRAINER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gicx/backbone/model.h"
#include "gicx/numerics/random.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

struct TrainConfig {
  int steps = 2000;
  int batch = 8;
  double learning_rate = 1e-3;
  // Probability that a sample's condition is replaced by the null code.
  double p_uncond = 0.1;
  // Random horizontal flips of training images.
  bool flip = true;
  // Give every training image its own embedding, initialized at its
  // descriptor and trained jointly with the network at this rate. Zero keeps
  // the descriptors fixed.
  double embedding_learning_rate = 0.0;
  uint64_t seed = 1;

  // Throws ParameterError on out-of-range values.
  void Validate() const;
};

struct TrainingLog {
  TrainConfig config;
  std::vector<double> loss;           // batch-mean loss per step
  std::vector<int> conditional;       // samples per step that kept their condition
  int64_t samples = 0;
  int64_t dropped = 0;

  // "# p_uncond=..." header, then step,loss,conditional rows.
  std::string ToCsv() const;
};

// One Bernoulli(p_uncond) draw: true means "use the null condition".
bool DrawConditionDropout(Rng& rng, double p_uncond);

// Fits the latent normalizer and descriptor statistics on `images`.
void FitDataStatistics(Model& model, std::span<const Tensor> images);

// Epsilon-prediction training with condition dropout. Each step draws
// `batch` images; for each: latent z0, t ~ U[1, T], eps ~ N(0, I),
// z_t = q_sample(z0, t, eps), condition = descriptor (or null with
// probability p_uncond), loss = mean((eps - net(z_t, t, c))^2). Calls
// FitDataStatistics first. Throws ParameterError for an empty dataset.
TrainingLog TrainDenoiser(Model& model, std::span<const Tensor> images, const TrainConfig& config);

// Mean of (eps - net(z_t, t, c))^2 over `draws` fresh (image, t, eps) draws,
// conditioning on each image's descriptor (or the null code).
double HeldOutNoiseMse(const Model& model, std::span<const Tensor> images, int draws, bool use_null,
                       uint64_t seed);

}  // namespace gicx

#endif  // GICX_BACKBONE_TRAINER_H_
