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

#ifndef GICX_GUIDANCE_GUIDANCE_H_
#define GICX_GUIDANCE_GUIDANCE_H_

#include <functional>

#include "gicx/backbone/model.h"
#include "gicx/diffusion/sampler.h"
#include "gicx/diffusion/schedule.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

struct GuidanceConfig {
  double s_f = 0.95;  // classifier-free scale
  double s_c = 215.0; // compression-guidance scale (L1-sum discrepancy)
  // Decoded guidance image, 3 x H/4 x W/4.
  Tensor reference;
  // Differentiate the guidance loss through the denoiser as well, instead of
  // holding eps_hat fixed.
  bool full_backprop = false;
  // Clamp the clean estimate to the model's latent bounds before guidance.
  bool clamp_x0 = true;

  // Throws ParameterError for negative or non-finite scales and
  // DimensionError unless `reference` is 3 x height/4 x width/4.
  void Validate(int64_t height, int64_t width) const;
};

// eps_uncond + s_f (eps_cond - eps_uncond). s_f = 1 and s_f = 0 return the
// conditional and unconditional inputs unchanged.
Tensor CfgCombine(const Tensor& eps_cond, const Tensor& eps_uncond, double s_f);

// Differentiable stand-in for "decode, then compress": latent -> image
// (unclamped) -> x4 average pooling.
class GuidanceProxy {
 public:
  using DecodeFn = std::function<Tensor(const Tensor&)>;
  explicit GuidanceProxy(DecodeFn decode) : decode_(std::move(decode)) {}
  // Uses the model's destandardize + latent decode.
  static GuidanceProxy ForModel(const Model& model);

  Tensor operator()(const Tensor& latent) const;

 private:
  DecodeFn decode_;
};

// sum |proxy(x0) - reference|. Throws DimensionError on shape mismatch.
Tensor GuidanceLoss(const GuidanceProxy& proxy, const Tensor& x0, const Tensor& reference);

// Gradient with respect to z_t of GuidanceLoss(proxy(predict_x0(z_t, t,
// eps_hat))), with eps_hat held constant. Uses (and clears) this thread's
// tape, so call it outside any graph the caller still needs.
Tensor CompressionGradient(const GuidanceProxy& proxy, const NoiseSchedule& schedule,
                           const Tensor& z_t, int t, const Tensor& eps_hat,
                           const Tensor& reference);

// Same, but eps_hat = eps_fn(z_t) is differentiated too.
Tensor CompressionGradientFull(const GuidanceProxy& proxy, const NoiseSchedule& schedule,
                               const Tensor& z_t, int t,
                               const std::function<Tensor(const Tensor&)>& eps_fn,
                               const Tensor& reference);

// mu - s_c sigma_t^2 grad, with sigma_t^2 the DDPM posterior variance.
Tensor PerturbMean(const Tensor& mu, const NoiseSchedule& schedule, int t, const Tensor& grad,
                   double s_c);
Tensor PerturbMean(const Tensor& mu, double variance, const Tensor& grad, double s_c);

// The DDPM mean is affine in eps:
//   mu(eps) = (z_t - beta_t / sqrt(1 - abar_t) eps) / sqrt(alpha_t),
// so shifting eps by  d = s_c sigma_t^2 sqrt(1 - abar_t) sqrt(alpha_t) / beta_t * grad
// moves the mean by exactly -s_c sigma_t^2 grad, i.e. PerturbMean. Returns
// eps + d. Samplers that consume eps (DDIM included) then see the guidance.
Tensor FoldGuidanceIntoEps(const Tensor& eps, const NoiseSchedule& schedule, int t,
                           const Tensor& grad, double s_c);

// Replaces eps_hat by the noise that reproduces clamp(predict_x0(z_t, eps_hat))
// per channel. Values only; nothing is recorded.
Tensor ClampPredictedNoise(const NoiseSchedule& schedule, const Tensor& z_t, int t,
                           const Tensor& eps_hat, const LatentBounds& bounds);

// Sampler callback: conditional and null predictions, CFG with s_f, the
// optional x0 clamp, then the compression-guidance fold with s_c.
// Predictions that s_f makes irrelevant (s_f = 0 or 1) are skipped; s_c = 0
// returns the (clamped) CFG output untouched.
DenoiseFn GuidedDenoiseFn(const Model& model, const GuidanceConfig& config,
                          const GuidanceProxy& proxy, const Tensor& embedding);

}  // namespace gicx

#endif  // GICX_GUIDANCE_GUIDANCE_H_
