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

#include "gicx/diffusion/sampler.h"

#include <algorithm>
#include <cmath>

#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"

namespace gicx {

namespace {

void CheckSameShape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": " + ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

}  // namespace

Tensor StandardNormal(Rng& rng, const Shape& shape) {
  std::vector<double> v(static_cast<std::size_t>(NumElements(shape)));
  for (double& x : v) x = rng.Normal();
  return Tensor(shape, std::move(v));
}

Tensor QSample(const NoiseSchedule& schedule, const Tensor& z0, int t, const Tensor& eps) {
  schedule.CheckTimestep(t);
  CheckSameShape(z0, eps, "q_sample");
  const double ab = schedule.alpha_bar(t);
  return Add(Scale(z0, std::sqrt(ab)), Scale(eps, std::sqrt(1.0 - ab)));
}

Tensor PredictX0(const NoiseSchedule& schedule, const Tensor& z_t, int t, const Tensor& eps_hat) {
  schedule.CheckTimestep(t);
  CheckSameShape(z_t, eps_hat, "predict_x0");
  const double ab = schedule.alpha_bar(t);
  return Scale(Sub(z_t, Scale(eps_hat, std::sqrt(1.0 - ab))), 1.0 / std::sqrt(ab));
}

Tensor DdpmPosteriorMean(const NoiseSchedule& schedule, const Tensor& z_t, int t,
                         const Tensor& eps_hat) {
  schedule.CheckTimestep(t);
  return DdpmPosteriorMean(z_t, eps_hat, schedule.alpha_bar(t), schedule.beta(t));
}

Tensor DdpmPosteriorMean(const Tensor& z_t, const Tensor& eps_hat, double alpha_bar,
                         double beta) {
  CheckSameShape(z_t, eps_hat, "ddpm_posterior_mean");
  const double coef = beta / std::sqrt(1.0 - alpha_bar);
  return Scale(Sub(z_t, Scale(eps_hat, coef)), 1.0 / std::sqrt(1.0 - beta));
}

Tensor DdpmStepFromMean(const NoiseSchedule& schedule, const Tensor& mean, int t, Rng& rng) {
  const double sigma = schedule.sigma(t);
  if (sigma == 0.0) return mean;
  return Add(mean, Scale(StandardNormal(rng, mean.shape()), sigma));
}

Tensor DdpmStep(const NoiseSchedule& schedule, const Tensor& z_t, int t, const Tensor& eps_hat,
                Rng& rng) {
  return DdpmStepFromMean(schedule, DdpmPosteriorMean(schedule, z_t, t, eps_hat), t, rng);
}

double DdimSigma(const NoiseSchedule& schedule, int t, int t_prev, double eta) {
  const double ab = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t_prev);
  return eta * std::sqrt((1.0 - ab_prev) / (1.0 - ab)) * std::sqrt(1.0 - ab / ab_prev);
}

Tensor DdimStep(const NoiseSchedule& schedule, const Tensor& z_t, int t, int t_prev,
                const Tensor& eps_hat, double eta, Rng& rng) {
  schedule.CheckTimestep(t);
  if (t_prev < 0 || t_prev >= t) {
    throw ParameterError("ddim step requires 0 <= t_prev < t, got t=" + std::to_string(t) +
                         " t_prev=" + std::to_string(t_prev));
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in [0, 1]");
  const double ab_prev = schedule.alpha_bar(t_prev);
  const double sigma = DdimSigma(schedule, t, t_prev, eta);
  const double dir = std::sqrt(std::max(0.0, 1.0 - ab_prev - sigma * sigma));
  Tensor x0 = PredictX0(schedule, z_t, t, eps_hat);
  Tensor out = Add(Scale(x0, std::sqrt(ab_prev)), Scale(eps_hat, dir));
  if (eta == 0.0 || sigma == 0.0) return out;
  return Add(out, Scale(StandardNormal(rng, z_t.shape()), sigma));
}

void SamplerConfig::Validate(const NoiseSchedule& schedule) const {
  if (num_steps < 1 || num_steps > schedule.steps()) {
    throw ParameterError("sampler steps must lie in [1, " + std::to_string(schedule.steps()) +
                         "]");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in [0, 1]");
}

std::vector<int> TimestepGrid(int total_steps, int num_steps) {
  if (num_steps < 1 || num_steps > total_steps) {
    throw ParameterError("timestep grid: need 1 <= num_steps <= T");
  }
  std::vector<int> grid(static_cast<std::size_t>(num_steps));
  if (num_steps == 1) {
    grid[0] = total_steps;
    return grid;
  }
  for (int i = 0; i < num_steps; ++i) {
    // Integer arithmetic keeps the grid identical on every platform.
    const int64_t offset =
        (static_cast<int64_t>(i) * (total_steps - 1) * 2 + (num_steps - 1)) / (2 * (num_steps - 1));
    grid[static_cast<std::size_t>(num_steps - 1 - i)] = 1 + static_cast<int>(offset);
  }
  return grid;
}

Tensor SampleLoop(const NoiseSchedule& schedule, const DenoiseFn& denoise,
                  const SamplerConfig& config, const Shape& shape) {
  config.Validate(schedule);
  Rng rng(config.seed);
  Tensor z = StandardNormal(rng, shape);
  const std::vector<int> grid = TimestepGrid(schedule.steps(), config.num_steps);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const int t = grid[i];
    const int t_prev = i + 1 < grid.size() ? grid[i + 1] : 0;
    Tensor eps = denoise(z, t);
    if (eps.shape() != z.shape()) {
      throw ContractError("denoiser returned shape " + ShapeToString(eps.shape()) +
                          ", expected " + ShapeToString(z.shape()));
    }
    z = DdimStep(schedule, z, t, t_prev, eps.Detach(), config.eta, rng);
  }
  return z;
}

}  // namespace gicx
