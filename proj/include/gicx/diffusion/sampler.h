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

#ifndef GICX_DIFFUSION_SAMPLER_H_
#define GICX_DIFFUSION_SAMPLER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "gicx/diffusion/schedule.h"
#include "gicx/numerics/random.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

// All functions below are built from differentiable primitives, so they can
// sit inside a recorded graph (compression guidance differentiates through
// PredictX0).

Tensor StandardNormal(Rng& rng, const Shape& shape);

// sqrt(abar_t) * z0 + sqrt(1 - abar_t) * eps
Tensor QSample(const NoiseSchedule& schedule, const Tensor& z0, int t, const Tensor& eps);

// Clean-sample estimate (z_t - sqrt(1 - abar_t) * eps_hat) / sqrt(abar_t).
Tensor PredictX0(const NoiseSchedule& schedule, const Tensor& z_t, int t, const Tensor& eps_hat);

// (z_t - beta_t / sqrt(1 - abar_t) * eps_hat) / sqrt(alpha_t)
Tensor DdpmPosteriorMean(const NoiseSchedule& schedule, const Tensor& z_t, int t,
                         const Tensor& eps_hat);
// Same formula with explicit coefficients, alpha_t = 1 - beta.
Tensor DdpmPosteriorMean(const Tensor& z_t, const Tensor& eps_hat, double alpha_bar,
                         double beta);

// mean + sigma_t * n. Draws n from `rng` only when sigma_t > 0.
Tensor DdpmStepFromMean(const NoiseSchedule& schedule, const Tensor& mean, int t, Rng& rng);
Tensor DdpmStep(const NoiseSchedule& schedule, const Tensor& z_t, int t, const Tensor& eps_hat,
                Rng& rng);

// Noise scale of a DDIM step from t to t_prev (t_prev = 0 is the clean end).
double DdimSigma(const NoiseSchedule& schedule, int t, int t_prev, double eta);

// z_{t_prev} = sqrt(abar_prev) x0 + sqrt(1 - abar_prev - s^2) eps_hat + s n,
// with s = DdimSigma(t, t_prev, eta). With eta == 0 no noise is drawn.
Tensor DdimStep(const NoiseSchedule& schedule, const Tensor& z_t, int t, int t_prev,
                const Tensor& eps_hat, double eta, Rng& rng);

struct SamplerConfig {
  int num_steps = 100;
  double eta = 1.0;
  uint64_t seed = 0;

  // Throws ParameterError unless 1 <= num_steps <= T and eta in [0, 1].
  void Validate(const NoiseSchedule& schedule) const;
};

// Uniform, strictly decreasing grid of `num_steps` timesteps from T down to 1
// (both ends included when num_steps > 1).
std::vector<int> TimestepGrid(int total_steps, int num_steps);

using DenoiseFn = std::function<Tensor(const Tensor& z_t, int t)>;

// Seeded z_T ~ N(0, I), then DDIM steps over TimestepGrid. Throws
// ContractError if `denoise` returns a tensor of the wrong shape.
Tensor SampleLoop(const NoiseSchedule& schedule, const DenoiseFn& denoise,
                  const SamplerConfig& config, const Shape& shape);

}  // namespace gicx

#endif  // GICX_DIFFUSION_SAMPLER_H_
