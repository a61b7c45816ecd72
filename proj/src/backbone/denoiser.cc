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

#include "gicx/backbone/denoiser.h"

#include <cmath>
#include <string>

#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"

namespace gicx {

namespace {

// Up to 8 groups, always dividing the channel count.
Tensor Norm(const Tensor& x) {
  int groups = 8;
  while (x.dim(0) % groups != 0) --groups;
  return GroupNorm(x, groups);
}

}  // namespace

void DenoiserConfig::Validate() const {
  if (channels < 1 || height < 4 || width < 4 || height % 4 != 0 || width % 4 != 0) {
    throw ParameterError("denoiser latent shape must be C >= 1 and H, W positive multiples of 4");
  }
  for (int w : widths) {
    if (w < 1) throw ParameterError("denoiser widths must be positive");
  }
  if (embed_dim < 2 || embed_dim % 2 != 0) throw ParameterError("embed_dim must be even and >= 2");
  if (tokens < 1 || dims < 1 || cond_hidden < 1) {
    throw ParameterError("embedding shape and cond_hidden must be positive");
  }
  if (timesteps < 1) throw ParameterError("timesteps must be positive");
}

const Tensor& Condition::embedding() const {
  if (!embedding_) throw ContractError("null condition has no embedding");
  return *embedding_;
}

DenoiserNet::DenoiserNet(const DenoiserConfig& config, uint64_t seed) : config_(config) {
  config_.Validate();
  Rng rng(seed);
  const auto [w1, w2, w3] = config_.widths;
  const int e = config_.embed_dim;
  // Gains: sqrt(2) ahead of SiLU, smaller on residual branches and outputs so
  // the unnormalized stack starts near identity.
  const double relu_gain = std::sqrt(2.0);
  time_in_ = MakeLinear(params_, "time.in", e, e, relu_gain, rng);
  time_out_ = MakeLinear(params_, "time.out", e, e, 1.0, rng);
  cond_token_ = MakeLinear(params_, "cond.token", config_.dims, config_.cond_hidden, relu_gain, rng);
  cond_out_ = MakeLinear(params_, "cond.out", config_.cond_hidden, e, 0.0, rng);
  null_vector_ = params_.Add("cond.null", Tensor::Zeros({1, e}));

  conv_in_ = MakeConv(params_, "conv_in", config_.channels, w1, 3, 1, 1, 1.0, rng);
  const std::array<int, 6> block_width = {w1, w2, w3, w3, w2, w1};
  for (int i = 0; i < 6; ++i) {
    const int c = block_width[i];
    const std::string p = "block" + std::to_string(i);
    ResBlock b;
    b.conv_a = MakeConv(params_, p + ".conv_a", c, c, 3, 1, 1, relu_gain, rng);
    b.film_scale = MakeLinear(params_, p + ".film_scale", e, c, 0.1, rng);
    b.film_shift = MakeLinear(params_, p + ".film_shift", e, c, 0.1, rng);
    b.conv_b = MakeConv(params_, p + ".conv_b", c, c, 3, 1, 1, 0.3, rng);
    blocks_.push_back(b);
    if (i == 0) down1_ = MakeConv(params_, "down1", w1, w2, 4, 2, 1, relu_gain, rng);
    if (i == 1) down2_ = MakeConv(params_, "down2", w2, w3, 4, 2, 1, relu_gain, rng);
    if (i == 3) up1_ = MakeConv(params_, "up1", w3, w2, 3, 1, 1, 1.0, rng);
    if (i == 4) up2_ = MakeConv(params_, "up2", w2, w1, 3, 1, 1, 1.0, rng);
  }
  conv_out_ = MakeConv(params_, "conv_out", w1, config_.channels, 3, 1, 1, 0.5, rng);
}

Tensor DenoiserNet::TimeFeatures(int t) const {
  const int half = config_.embed_dim / 2;
  std::vector<double> f(static_cast<std::size_t>(config_.embed_dim));
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    f[i] = std::sin(t * freq);
    f[half + i] = std::cos(t * freq);
  }
  return Tensor({1, config_.embed_dim}, std::move(f));
}

Tensor DenoiserNet::ProjectCondition(const Tensor& e) const {
  if (e.shape() != Shape{config_.tokens, config_.dims}) {
    throw DimensionError("embedding " + ShapeToString(e.shape()) + ", expected " +
                         ShapeToString({config_.tokens, config_.dims}));
  }
  return cond_out_(MeanRows(Silu(cond_token_(e))));
}

Tensor DenoiserNet::Block(const ResBlock& block, const Tensor& x, const Tensor& modulation) const {
  const int64_t c = x.dim(0);
  Tensor h = block.conv_a(Silu(Norm(x)));
  const Tensor scale = Add(block.film_scale(modulation), 1.0).Reshape({c});
  const Tensor shift = block.film_shift(modulation).Reshape({c});
  h = ChannelScaleShift(Norm(h), scale, shift);
  h = block.conv_b(Silu(h));
  return Add(x, h);
}

Tensor DenoiserNet::Forward(const Tensor& z_t, int t, const Condition& condition) const {
  const Shape expected{config_.channels, config_.height, config_.width};
  if (z_t.shape() != expected) {
    throw DimensionError("denoiser input " + ShapeToString(z_t.shape()) + ", expected " +
                         ShapeToString(expected));
  }
  if (t < 1 || t > config_.timesteps) {
    throw ParameterError("timestep " + std::to_string(t) + " outside [1, " +
                         std::to_string(config_.timesteps) + "]");
  }
  Tensor v = Add(time_out_(Silu(time_in_(TimeFeatures(t)))), null_vector_);
  if (!condition.is_null()) v = Add(v, ProjectCondition(condition.embedding()));
  const Tensor m = Silu(v);

  Tensor x = conv_in_(z_t);
  x = Block(blocks_[0], x, m);
  const Tensor skip1 = x;
  x = Block(blocks_[1], down1_(x), m);
  const Tensor skip2 = x;
  x = Block(blocks_[2], down2_(x), m);
  x = Block(blocks_[3], x, m);
  x = Block(blocks_[4], Add(up1_(UpsampleNearest(x, 2)), skip2), m);
  x = Block(blocks_[5], Add(up2_(UpsampleNearest(x, 2)), skip1), m);
  return conv_out_(Silu(Norm(x)));
}

Tensor PredictNoise(const DenoiserNet& net, const Tensor& z_t, int t, const Condition& condition) {
  return net.Forward(z_t, t, condition);
}

}  // namespace gicx
