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

#include "gicx/guidance/guidance.h"

#include <algorithm>
#include <cmath>

#include "gicx/codec/guidance_codec.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"

namespace gicx {

namespace {

Tensor GradientLeaf(const Tensor& z) {
  Tensor leaf = z.Detach();
  leaf.set_requires_grad(true);
  return leaf;
}

Tensor TakeGradient(const Tensor& leaf) {
  if (!leaf.has_grad()) return Tensor::Zeros(leaf.shape());
  return Tensor(leaf.shape(), std::vector<double>(leaf.grad().begin(), leaf.grad().end()));
}

void CheckSameShape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": " + ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

}  // namespace

void GuidanceConfig::Validate(int64_t height, int64_t width) const {
  if (!std::isfinite(s_f) || s_f < 0.0) throw ParameterError("s_f must be finite and >= 0");
  if (!std::isfinite(s_c) || s_c < 0.0) throw ParameterError("s_c must be finite and >= 0");
  const Shape expected{3, height / kGuidanceDownsample, width / kGuidanceDownsample};
  if (reference.shape() != expected) {
    throw DimensionError("guidance reference " + ShapeToString(reference.shape()) +
                         ", expected " + ShapeToString(expected));
  }
}

Tensor CfgCombine(const Tensor& eps_cond, const Tensor& eps_uncond, double s_f) {
  CheckSameShape(eps_cond, eps_uncond, "cfg");
  if (s_f == 1.0) return eps_cond;
  if (s_f == 0.0) return eps_uncond;
  return Add(eps_uncond, Scale(Sub(eps_cond, eps_uncond), s_f));
}

GuidanceProxy GuidanceProxy::ForModel(const Model& model) {
  return GuidanceProxy([&model](const Tensor& z) { return model.ToImage(z); });
}

Tensor GuidanceProxy::operator()(const Tensor& latent) const {
  return AvgPool2d(decode_(latent), kGuidanceDownsample);
}

Tensor GuidanceLoss(const GuidanceProxy& proxy, const Tensor& x0, const Tensor& reference) {
  const Tensor p = proxy(x0);
  CheckSameShape(p, reference, "guidance loss");
  return Sum(Abs(Sub(p, reference)));
}

Tensor CompressionGradient(const GuidanceProxy& proxy, const NoiseSchedule& schedule,
                           const Tensor& z_t, int t, const Tensor& eps_hat,
                           const Tensor& reference) {
  CheckSameShape(z_t, eps_hat, "compression gradient");
  const Tensor z = GradientLeaf(z_t);
  const Tensor x0 = PredictX0(schedule, z, t, eps_hat.Detach());
  Backward(GuidanceLoss(proxy, x0, reference));
  return TakeGradient(z);
}

Tensor CompressionGradientFull(const GuidanceProxy& proxy, const NoiseSchedule& schedule,
                               const Tensor& z_t, int t,
                               const std::function<Tensor(const Tensor&)>& eps_fn,
                               const Tensor& reference) {
  const Tensor z = GradientLeaf(z_t);
  const Tensor eps = eps_fn(z);
  CheckSameShape(z_t, eps, "compression gradient");
  Backward(GuidanceLoss(proxy, PredictX0(schedule, z, t, eps), reference));
  return TakeGradient(z);
}

Tensor PerturbMean(const Tensor& mu, const NoiseSchedule& schedule, int t, const Tensor& grad,
                   double s_c) {
  return PerturbMean(mu, schedule.posterior_variance(t), grad, s_c);
}

Tensor PerturbMean(const Tensor& mu, double variance, const Tensor& grad, double s_c) {
  CheckSameShape(mu, grad, "perturb mean");
  if (s_c == 0.0 || variance == 0.0) return mu;
  return Sub(mu, Scale(grad, s_c * variance));
}

Tensor FoldGuidanceIntoEps(const Tensor& eps, const NoiseSchedule& schedule, int t,
                           const Tensor& grad, double s_c) {
  CheckSameShape(eps, grad, "guidance fold");
  const double var = schedule.posterior_variance(t);
  if (s_c == 0.0 || var == 0.0) return eps;
  const double coeff = s_c * var * std::sqrt(1.0 - schedule.alpha_bar(t)) *
                       std::sqrt(schedule.alpha(t)) / schedule.beta(t);
  return Add(eps, Scale(grad, coeff));
}

Tensor ClampPredictedNoise(const NoiseSchedule& schedule, const Tensor& z_t, int t,
                           const Tensor& eps_hat, const LatentBounds& bounds) {
  if (z_t.shape() != eps_hat.shape() || z_t.rank() < 1) {
    throw DimensionError("clamp: z_t " + ShapeToString(z_t.shape()) + " vs eps " +
                         ShapeToString(eps_hat.shape()));
  }
  const int64_t channels = z_t.dim(0);
  if (static_cast<int64_t>(bounds.lo.size()) != channels ||
      static_cast<int64_t>(bounds.hi.size()) != channels) {
    throw DimensionError("clamp bounds need one interval per channel");
  }
  const double ab = schedule.alpha_bar(t);
  const double sa = std::sqrt(ab), sn = std::sqrt(1.0 - ab);
  const int64_t per = z_t.numel() / channels;
  std::vector<double> out(static_cast<std::size_t>(z_t.numel()));
  for (int64_t c = 0; c < channels; ++c) {
    for (int64_t i = 0; i < per; ++i) {
      const std::size_t k = static_cast<std::size_t>(c * per + i);
      const double x0 = (z_t[k] - sn * eps_hat[k]) / sa;
      const double clamped = std::clamp(x0, bounds.lo[c], bounds.hi[c]);
      out[k] = clamped == x0 ? eps_hat[k] : (z_t[k] - sa * clamped) / sn;
    }
  }
  return Tensor(z_t.shape(), std::move(out));
}

DenoiseFn GuidedDenoiseFn(const Model& model, const GuidanceConfig& config,
                          const GuidanceProxy& proxy, const Tensor& embedding) {
  config.Validate(model.config().image_height, model.config().image_width);
  const Condition cond = Condition::Embedding(embedding);
  auto cfg = [&model, cond, s_f = config.s_f](const Tensor& z, int t) {
    const DenoiserNet& net = model.net();
    if (s_f == 1.0) return PredictNoise(net, z, t, cond);
    if (s_f == 0.0) return PredictNoise(net, z, t, Condition::Null());
    return CfgCombine(PredictNoise(net, z, t, cond), PredictNoise(net, z, t, Condition::Null()),
                      s_f);
  };
  const LatentBounds bounds = config.clamp_x0 ? model.latent_bounds() : LatentBounds{};
  return [&model, config, proxy, cfg, bounds](const Tensor& z_t, int t) -> Tensor {
    Tensor eps;
    {
      NoGradGuard no_grad;
      eps = cfg(z_t, t);
      if (config.clamp_x0) eps = ClampPredictedNoise(model.schedule(), z_t, t, eps, bounds);
    }
    if (config.s_c == 0.0) return eps;
    const NoiseSchedule& schedule = model.schedule();
    const Tensor grad =
        config.full_backprop
            ? CompressionGradientFull(proxy, schedule, z_t, t,
                                      [&](const Tensor& z) { return cfg(z, t); }, config.reference)
            : CompressionGradient(proxy, schedule, z_t, t, eps, config.reference);
    return FoldGuidanceIntoEps(eps, schedule, t, grad, config.s_c);
  };
}

}  // namespace gicx
