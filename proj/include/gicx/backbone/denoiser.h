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

#ifndef GICX_BACKBONE_DENOISER_H_
#define GICX_BACKBONE_DENOISER_H_

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "gicx/backbone/layers.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

struct DenoiserConfig {
  // Latent shape the network accepts.
  int channels = 3;
  int height = 32;
  int width = 32;
  // Feature widths of the three resolution levels (full, 1/2, 1/4).
  std::array<int, 3> widths = {32, 64, 128};
  // Width of the time/condition vector that drives feature modulation.
  int embed_dim = 64;
  // Embedding matrix shape: `tokens` rows of `dims` values.
  int tokens = 8;
  int dims = 32;
  // Hidden width of the token-wise condition projection.
  int cond_hidden = 64;
  // Largest valid timestep.
  int timesteps = 1000;

  // Throws ParameterError for non-positive sizes or H, W not divisible by 4.
  void Validate() const;
  bool operator==(const DenoiserConfig&) const = default;
};

// Either an embedding matrix or the reserved unconditional code.
class Condition {
 public:
  static Condition Null() { return Condition(); }
  static Condition Embedding(Tensor e) { return Condition(std::move(e)); }

  bool is_null() const { return !embedding_.has_value(); }
  // Throws ContractError on the null condition.
  const Tensor& embedding() const;

 private:
  Condition() = default;
  explicit Condition(Tensor e) : embedding_(std::move(e)) {}
  std::optional<Tensor> embedding_;
};

// Three-level convolutional encoder-decoder predicting the noise in z_t.
//
// Residual blocks are pre-activation (group norm, SiLU, conv) and the middle
// group norm of each block is modulated per channel by scale and shift computed
// from one vector: time embedding + null vector + P(e), where P is a
// token-wise two-layer projection pooled over tokens. The last layer of P
// starts at zero and the null vector is a learned parameter, so the null
// condition is simply "P(e) omitted"; if P's output layer never receives a
// conditional gradient the network cannot tell any e from the null code.
class DenoiserNet {
 public:
  DenoiserNet(const DenoiserConfig& config, uint64_t seed);

  // Throws DimensionError if z_t or e has the wrong shape and ParameterError
  // if t is outside [1, timesteps].
  Tensor Forward(const Tensor& z_t, int t, const Condition& condition) const;

  // The pooled condition vector P(e), [1 x embed_dim].
  Tensor ProjectCondition(const Tensor& e) const;

  const DenoiserConfig& config() const { return config_; }
  const ParameterSet& params() const { return params_; }
  ParameterSet& params() { return params_; }

 private:
  struct ResBlock {
    Conv conv_a, conv_b;
    Linear film_scale, film_shift;
  };
  Tensor Block(const ResBlock& block, const Tensor& x, const Tensor& modulation) const;
  Tensor TimeFeatures(int t) const;

  DenoiserConfig config_;
  ParameterSet params_;
  Linear time_in_, time_out_;
  Linear cond_token_, cond_out_;
  Tensor null_vector_;
  Conv conv_in_, down1_, down2_, up1_, up2_, conv_out_;
  std::vector<ResBlock> blocks_;
};

// eps_hat = net(z_t, t, condition).
Tensor PredictNoise(const DenoiserNet& net, const Tensor& z_t, int t, const Condition& condition);

}  // namespace gicx

#endif  // GICX_BACKBONE_DENOISER_H_
