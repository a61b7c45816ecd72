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

#include "gicx/backbone/latent_codec.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "gicx/metrics/image_io.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"
#include "gicx/numerics/optimizer.h"

namespace gicx {

LatentCodec LatentCodec::Identity() { return LatentCodec(); }

LatentCodec LatentCodec::Autoencoder(const AutoencoderConfig& config, uint64_t seed) {
  if (config.latent_channels < 1 || config.hidden < 1) {
    throw ParameterError("autoencoder channel counts must be positive");
  }
  LatentCodec c;
  c.kind_ = LatentCodecKind::kAutoencoder;
  c.ae_config_ = config;
  Rng rng(seed);
  ParameterSet& p = *c.params_;
  const int h = config.hidden, l = config.latent_channels;
  const double g = std::sqrt(2.0);
  c.encoder_ = {MakeConv(p, "enc0", 3, h, 3, 1, 1, g, rng),
                MakeConv(p, "enc1", h, h, 4, 2, 1, g, rng),
                MakeConv(p, "enc2", h, h, 4, 2, 1, g, rng),
                MakeConv(p, "enc3", h, l, 3, 1, 1, 1.0, rng)};
  c.decoder_ = {MakeConv(p, "dec0", l, h, 3, 1, 1, g, rng),
                MakeConv(p, "dec1", h, h, 3, 1, 1, g, rng),
                MakeConv(p, "dec2", h, h, 3, 1, 1, g, rng),
                MakeConv(p, "dec3", h, 3, 3, 1, 1, 1.0, rng)};
  return c;
}

Tensor LatentCodec::Encode(const Tensor& image) const {
  if (kind_ == LatentCodecKind::kIdentity) return image;
  LatentShape(image.dim(1), image.dim(2));
  Tensor x = Silu(encoder_[0](image));
  x = Silu(encoder_[1](x));
  x = Silu(encoder_[2](x));
  return encoder_[3](x);
}

Tensor LatentCodec::Decode(const Tensor& latent) const {
  if (kind_ == LatentCodecKind::kIdentity) return latent;
  Tensor x = Silu(decoder_[0](latent));
  x = Silu(decoder_[1](UpsampleNearest(x, 2)));
  x = Silu(decoder_[2](UpsampleNearest(x, 2)));
  return Add(decoder_[3](x), 0.5);
}

Shape LatentCodec::LatentShape(int64_t height, int64_t width) const {
  if (kind_ == LatentCodecKind::kIdentity) return {3, height, width};
  if (height < 4 || width < 4 || height % 4 != 0 || width % 4 != 0) {
    throw ParameterError("autoencoder needs H and W divisible by 4, got " +
                         std::to_string(height) + "x" + std::to_string(width));
  }
  return {ae_config_.latent_channels, height / 4, width / 4};
}

Shape LatentCodec::ImageShape(const Shape& latent_shape) const {
  if (kind_ == LatentCodecKind::kIdentity) return latent_shape;
  return {3, latent_shape.at(1) * 4, latent_shape.at(2) * 4};
}

Tensor EncodeLatent(const LatentCodec& codec, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError("expected a 3 x H x W image, got " + ShapeToString(image.shape()));
  }
  return codec.Encode(image);
}

Tensor DecodeLatent(const LatentCodec& codec, const Tensor& latent) {
  return ClampImage(codec.Decode(latent));
}

LatentNormalizer LatentNormalizer::Fit(std::span<const Tensor> latents) {
  if (latents.empty()) throw ParameterError("cannot fit a normalizer on no latents");
  const int64_t c = latents[0].dim(0);
  std::vector<double> sum(c, 0.0), sq(c, 0.0);
  double per_channel = 0.0;
  for (const Tensor& z : latents) {
    if (z.dim(0) != c) throw ParameterError("latents disagree on channel count");
    const int64_t plane = z.numel() / c;
    for (int64_t ch = 0; ch < c; ++ch) {
      for (int64_t i = 0; i < plane; ++i) {
        const double v = z[ch * plane + i];
        sum[ch] += v;
        sq[ch] += v * v;
      }
    }
    per_channel += static_cast<double>(plane);
  }
  LatentNormalizer n;
  for (int64_t ch = 0; ch < c; ++ch) {
    const double m = sum[ch] / per_channel;
    const double var = std::max(sq[ch] / per_channel - m * m, 0.0);
    n.mean.push_back(m);
    n.stddev.push_back(std::max(std::sqrt(var), 1e-3));
  }
  return n;
}

LatentNormalizer LatentNormalizer::Unit(int channels) {
  return {std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0)};
}

Tensor LatentNormalizer::Standardize(const Tensor& z) const {
  std::vector<double> s(mean.size()), b(mean.size());
  for (std::size_t c = 0; c < mean.size(); ++c) {
    s[c] = 1.0 / stddev[c];
    b[c] = -mean[c] / stddev[c];
  }
  const int64_t n = static_cast<int64_t>(mean.size());
  return ChannelScaleShift(z, Tensor({n}, s), Tensor({n}, b));
}

Tensor LatentNormalizer::Destandardize(const Tensor& z) const {
  const int64_t n = static_cast<int64_t>(mean.size());
  return ChannelScaleShift(z, Tensor({n}, stddev), Tensor({n}, mean));
}

std::vector<double> TrainAutoencoder(LatentCodec& codec, std::span<const Tensor> images,
                                     int steps, int batch, double learning_rate, uint64_t seed) {
  if (codec.kind() != LatentCodecKind::kAutoencoder) {
    throw ContractError("only an autoencoder codec can be trained");
  }
  if (images.empty()) throw ParameterError("autoencoder training needs images");
  if (steps < 0 || batch < 1) throw ParameterError("steps must be >= 0 and batch >= 1");
  Adam opt(codec.params().tensors(), {.learning_rate = learning_rate});
  opt.ZeroGrad();
  Rng rng(seed);
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(steps));
  for (int step = 0; step < steps; ++step) {
    Tensor total = Tensor::Scalar(0.0);
    for (int b = 0; b < batch; ++b) {
      const Tensor& x = images[static_cast<std::size_t>(
          rng.UniformInt(0, static_cast<int64_t>(images.size()) - 1))];
      total = Add(total, MseLoss(codec.Decode(codec.Encode(x)), x));
    }
    total = Scale(total, 1.0 / batch);
    losses.push_back(total.item());
    Backward(total);
    opt.Step();
  }
  return losses;
}

}  // namespace gicx
