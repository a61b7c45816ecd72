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

#ifndef GICX_BACKBONE_MODEL_H_
#define GICX_BACKBONE_MODEL_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gicx/backbone/denoiser.h"
#include "gicx/backbone/latent_codec.h"
#include "gicx/diffusion/schedule.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

struct ModelConfig {
  int image_height = 32;
  int image_width = 32;
  LatentCodecKind codec = LatentCodecKind::kIdentity;
  AutoencoderConfig autoencoder;
  // channels/height/width are derived from the codec and image size.
  DenoiserConfig net;
  ScheduleParams schedule;
  uint64_t seed = 1;
  // Seeds the fixed projection behind ImageDescriptor.
  uint64_t descriptor_seed = 2;

  // Fills the derived denoiser shape and validates everything.
  ModelConfig Resolved() const;
  bool operator==(const ModelConfig&) const = default;
};

// Per-channel interval of the standardized latent space.
struct LatentBounds {
  std::vector<double> lo;
  std::vector<double> hi;
};

// Everything a checkpoint holds: denoiser, latent codec, latent normalizer
// and training statistics.
class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const DenoiserNet& net() const { return net_; }
  DenoiserNet& net() { return net_; }
  const LatentCodec& codec() const { return codec_; }
  LatentCodec& codec() { return codec_; }
  const LatentNormalizer& normalizer() const { return normalizer_; }
  void set_normalizer(LatentNormalizer n) { normalizer_ = std::move(n); }

  // Toggles gradient tracking on every weight (denoiser and codec). Inference
  // and inversion run with the model frozen.
  void SetTrainable(bool trainable);

  // Named scalars recorded at training time (descriptor statistics, final
  // losses, condition dropout rate).
  const std::map<std::string, double>& stats() const { return stats_; }
  void set_stat(const std::string& key, double value) { stats_[key] = value; }
  // Throws Error if absent.
  double stat(const std::string& key) const;

  // Image -> standardized latent, and back. Both differentiable; ToImage does
  // not clamp.
  Tensor ToLatent(const Tensor& image) const;
  Tensor ToImage(const Tensor& latent) const;
  Shape latent_shape() const;

  // Where clean latents live. Identity codec: the image of [0, 1] under the
  // normalizer. Autoencoder: the per-channel range of the training latents
  // (stats "latent_min/<c>" and "latent_max/<c>"; throws Error if absent).
  LatentBounds latent_bounds() const;

  // Deterministic embedding used as the training condition: an 8 x 8
  // area-averaged thumbnail of (image - 0.5) pushed through a fixed Gaussian
  // projection (seeded by descriptor_seed) and reshaped to tokens x dims.
  Tensor ImageDescriptor(const Tensor& image) const;

  // FNV-1a of the encoded checkpoint.
  uint64_t Id() const;

 private:
  ModelConfig config_;
  NoiseSchedule schedule_;
  DenoiserNet net_;
  LatentCodec codec_;
  LatentNormalizer normalizer_;
  std::map<std::string, double> stats_;
};

// Checkpoint layout (little-endian):
//   "GCKP" | u32 version | architecture block | normalizer block
//   | u32 tensor count | count x (string name | GTNS snapshot)
//   | u32 stat count | count x (string key | f64 value)
// Strings are u32 length + bytes.
inline constexpr uint32_t kCheckpointVersion = 1;
std::vector<uint8_t> EncodeCheckpoint(const Model& model);
// Throws FormatError naming the offending field.
Model DecodeCheckpoint(std::span<const uint8_t> bytes);
void SaveCheckpoint(const std::string& path, const Model& model);
Model LoadCheckpoint(const std::string& path);

}  // namespace gicx

#endif  // GICX_BACKBONE_MODEL_H_
