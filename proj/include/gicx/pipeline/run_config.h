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

#ifndef GICX_PIPELINE_RUN_CONFIG_H_
#define GICX_PIPELINE_RUN_CONFIG_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gicx/backbone/model.h"
#include "gicx/backbone/trainer.h"
#include "gicx/diffusion/sampler.h"
#include "gicx/guidance/guidance.h"
#include "gicx/inversion/inversion.h"
#include "gicx/metrics/toy_dataset.h"

namespace gicx {

enum class Preset { kToy, kPaper };

// "toy" or "paper"; anything else throws ParameterError.
Preset ParsePreset(std::string_view name);

// Every setting of a run, flat. Keys are listed by RunConfig::Keys() and the
// text form is one "key = value" per line; '#' starts a comment.
//
// A single `seed` drives model init, training, inversion and sampling
// (sample k of a decompression uses seed + k).
struct RunConfig {
  uint64_t seed = 0;
  std::string checkpoint = "model.gckp";

  int height = 32;
  int width = 32;
  std::string codec = "identity";  // identity | autoencoder
  int latent_channels = 8;
  int ae_hidden = 32;
  std::array<int, 3> widths = {8, 16, 32};
  int embed_dim = 64;
  int tokens = 8;
  int dims = 32;
  int cond_hidden = 64;

  int schedule_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  int train_steps = 3000;
  int train_batch = 8;
  double train_lr = 2e-3;
  double p_uncond = 0.1;
  double embedding_lr = 0.01;
  bool flip = true;
  int ae_steps = 0;
  int ae_batch = 8;
  double ae_lr = 1e-3;

  int inversion_steps = 500;
  double inversion_lr = 0.02;
  int inversion_draws = 1;
  bool quantize_in_loop = true;
  int embedding_levels = 256;

  int guidance_levels = 32;
  double s_c = 215.0;
  double s_f = 0.95;
  bool full_backprop = false;
  bool clamp_x0 = true;

  int sampler_steps = 100;
  double eta = 1.0;
  int samples = 1;

  int dataset_count = 24;
  std::string dataset_kind = "mixed";

  // toy: the defaults above with a 20-step deterministic sampler.
  // paper: 512 x 768 images through a x4 autoencoder, 64 x 768 embedding,
  // 4000 inversion steps, 100-step sampler with eta = 1.
  static RunConfig ForPreset(Preset preset);

  static const std::vector<std::string>& Keys();

  // Throws ParameterError for unknown keys and unparsable values.
  void Set(std::string_view key, std::string_view value);
  std::string Get(std::string_view key) const;

  // Every key, in Keys() order. Parsing the result onto any base config
  // reproduces this one.
  std::string ToText() const;
  // Applies the assignments in `text` in order. Errors name the line.
  void ApplyText(std::string_view text);

  // Throws ParameterError for values no stage would accept.
  void Validate() const;

  ModelConfig ToModelConfig() const;
  TrainConfig ToTrainConfig() const;
  InversionConfig ToInversionConfig() const;
  SamplerConfig ToSamplerConfig(int sample) const;
  ToyDatasetSpec ToDatasetSpec() const;

  bool operator==(const RunConfig&) const = default;
};

// ForPreset(base) with the file at `path` applied on top.
RunConfig LoadRunConfig(const std::string& path, Preset base);

}  // namespace gicx

#endif  // GICX_PIPELINE_RUN_CONFIG_H_
