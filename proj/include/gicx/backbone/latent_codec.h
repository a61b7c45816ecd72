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

#ifndef GICX_BACKBONE_LATENT_CODEC_H_
#define GICX_BACKBONE_LATENT_CODEC_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gicx/backbone/layers.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

enum class LatentCodecKind : uint8_t { kIdentity = 0, kAutoencoder = 1 };

struct AutoencoderConfig {
  int latent_channels = 8;
  int hidden = 32;
  bool operator==(const AutoencoderConfig&) const = default;
};

// Maps images (3 x H x W in [0, 1]) to the space diffusion runs in and back.
// Identity mode passes tensors through untouched. Autoencoder mode uses two
// stride-2 convolutions (x4 spatial reduction) and a mirrored decoder.
class LatentCodec {
 public:
  static LatentCodec Identity();
  static LatentCodec Autoencoder(const AutoencoderConfig& config, uint64_t seed);

  LatentCodecKind kind() const { return kind_; }
  const AutoencoderConfig& autoencoder_config() const { return ae_config_; }

  // Differentiable, unclamped. Throw ParameterError for spatial sizes the
  // autoencoder cannot halve twice.
  Tensor Encode(const Tensor& image) const;
  Tensor Decode(const Tensor& latent) const;

  Shape LatentShape(int64_t height, int64_t width) const;
  Shape ImageShape(const Shape& latent_shape) const;

  const ParameterSet& params() const { return *params_; }
  ParameterSet& params() { return *params_; }

 private:
  LatentCodec() : params_(std::make_shared<ParameterSet>()) {}
  LatentCodecKind kind_ = LatentCodecKind::kIdentity;
  AutoencoderConfig ae_config_;
  std::shared_ptr<ParameterSet> params_;
  std::vector<Conv> encoder_, decoder_;
};

// Checked entry points: image must be 3 x H x W. DecodeLatent clamps its
// result to [0, 1].
Tensor EncodeLatent(const LatentCodec& codec, const Tensor& image);
Tensor DecodeLatent(const LatentCodec& codec, const Tensor& latent);

// Per-channel affine map to zero mean and unit variance, fitted on training
// latents and stored with the model.
struct LatentNormalizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  // Throws ParameterError on an empty list or mismatched channel counts.
  static LatentNormalizer Fit(std::span<const Tensor> latents);
  static LatentNormalizer Unit(int channels);

  // Both are differentiable.
  Tensor Standardize(const Tensor& z) const;
  Tensor Destandardize(const Tensor& z) const;
  bool operator==(const LatentNormalizer&) const = default;
};

// Train the autoencoder on `images` by per-pixel MSE. Returns the loss per
// step. The codec must be in autoencoder mode.
std::vector<double> TrainAutoencoder(LatentCodec& codec, std::span<const Tensor> images,
                                     int steps, int batch, double learning_rate, uint64_t seed);

}  // namespace gicx

#endif  // GICX_BACKBONE_LATENT_CODEC_H_
