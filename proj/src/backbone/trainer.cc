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

#include "gicx/backbone/trainer.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "gicx/diffusion/sampler.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"
#include "gicx/numerics/optimizer.h"

namespace gicx {

namespace {

Tensor FlipHorizontal(const Tensor& image) {
  const int64_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  std::vector<double> out(static_cast<std::size_t>(image.numel()));
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x) out[(ch * h + y) * w + x] = image[(ch * h + y) * w + w - 1 - x];
  return Tensor(image.shape(), std::move(out));
}

}  // namespace

void TrainConfig::Validate() const {
  if (steps < 0) throw ParameterError("training steps must be non-negative");
  if (batch < 1) throw ParameterError("batch must be at least 1");
  if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(p_uncond >= 0.0 && p_uncond <= 1.0)) throw ParameterError("p_uncond must be in [0, 1]");
  if (!(embedding_learning_rate >= 0.0)) {
    throw ParameterError("embedding learning rate must be non-negative");
  }
}

std::string TrainingLog::ToCsv() const {
  std::ostringstream out;
  out.precision(17);
  out << "# p_uncond=" << config.p_uncond << " steps=" << config.steps
      << " batch=" << config.batch << " lr=" << config.learning_rate << " seed=" << config.seed
      << "\n";
  out << "step,loss,conditional\n";
  for (std::size_t i = 0; i < loss.size(); ++i) {
    out << i << "," << loss[i] << "," << conditional[i] << "\n";
  }
  return out.str();
}

bool DrawConditionDropout(Rng& rng, double p_uncond) { return rng.Bernoulli(p_uncond); }

void FitDataStatistics(Model& model, std::span<const Tensor> images) {
  if (images.empty()) throw ParameterError("training dataset is empty");
  std::vector<Tensor> latents;
  double sum = 0.0, sq = 0.0, n = 0.0;
  {
    NoGradGuard no_grad;
    for (const Tensor& x : images) {
      latents.push_back(EncodeLatent(model.codec(), x));
      const Tensor d = model.ImageDescriptor(x);
      for (double v : d.data()) {
        sum += v;
        sq += v * v;
        n += 1.0;
      }
    }
  }
  model.set_normalizer(LatentNormalizer::Fit(latents));
  if (model.codec().kind() != LatentCodecKind::kIdentity) {
    NoGradGuard no_grad;
    const int64_t channels = latents.front().dim(0);
    std::vector<double> lo(channels, HUGE_VAL), hi(channels, -HUGE_VAL);
    for (const Tensor& z : latents) {
      const Tensor s = model.normalizer().Standardize(z);
      const int64_t per = s.numel() / channels;
      for (int64_t c = 0; c < channels; ++c) {
        for (int64_t i = 0; i < per; ++i) {
          lo[c] = std::min(lo[c], s[c * per + i]);
          hi[c] = std::max(hi[c], s[c * per + i]);
        }
      }
    }
    for (int64_t c = 0; c < channels; ++c) {
      model.set_stat("latent_min/" + std::to_string(c), lo[c]);
      model.set_stat("latent_max/" + std::to_string(c), hi[c]);
    }
  }
  const double mean = sum / n;
  model.set_stat("descriptor_mean", mean);
  model.set_stat("descriptor_std", std::sqrt(std::max(sq / n - mean * mean, 1e-12)));
}

TrainingLog TrainDenoiser(Model& model, std::span<const Tensor> images, const TrainConfig& config) {
  config.Validate();
  if (images.empty()) throw ParameterError("training dataset is empty");
  FitDataStatistics(model, images);

  std::vector<Tensor> pool(images.begin(), images.end());
  if (config.flip) {
    for (const Tensor& x : images) pool.push_back(FlipHorizontal(x));
  }
  std::vector<Tensor> latents, descriptors;
  {
    NoGradGuard no_grad;
    for (const Tensor& x : pool) {
      latents.push_back(model.ToLatent(x).Detach());
      descriptors.push_back(model.ImageDescriptor(x));
    }
  }

  model.net().params().SetTrainable(true);
  Adam opt(model.net().params().tensors(), {.learning_rate = config.learning_rate});
  opt.ZeroGrad();
  const bool learn_embeddings = config.embedding_learning_rate > 0.0;
  std::optional<Adam> embedding_opt;
  if (learn_embeddings) {
    for (Tensor& d : descriptors) d.set_requires_grad(true);
    embedding_opt.emplace(descriptors, AdamOptions{.learning_rate = config.embedding_learning_rate});
    embedding_opt->ZeroGrad();
  }
  const NoiseSchedule& schedule = model.schedule();
  Rng rng(config.seed);
  TrainingLog log;
  log.config = config;
  for (int step = 0; step < config.steps; ++step) {
    // Cosine decay to a tenth of the base rate.
    const double progress = config.steps > 1 ? static_cast<double>(step) / (config.steps - 1) : 0.0;
    opt.set_learning_rate(config.learning_rate *
                          (0.55 + 0.45 * std::cos(std::numbers::pi * progress)));
    Tensor total = Tensor::Scalar(0.0);
    int kept = 0;
    for (int b = 0; b < config.batch; ++b) {
      const auto idx = static_cast<std::size_t>(
          rng.UniformInt(0, static_cast<int64_t>(pool.size()) - 1));
      const int t = static_cast<int>(rng.UniformInt(1, schedule.steps()));
      const Tensor eps = StandardNormal(rng, latents[idx].shape());
      const Tensor z_t = QSample(schedule, latents[idx], t, eps);
      const bool drop = DrawConditionDropout(rng, config.p_uncond);
      const Condition c = drop ? Condition::Null() : Condition::Embedding(descriptors[idx]);
      kept += drop ? 0 : 1;
      total = Add(total, MseLoss(PredictNoise(model.net(), z_t, t, c), eps));
    }
    total = Scale(total, 1.0 / config.batch);
    log.loss.push_back(total.item());
    log.conditional.push_back(kept);
    log.samples += config.batch;
    log.dropped += config.batch - kept;
    Backward(total);
    opt.Step();
    if (embedding_opt) embedding_opt->Step();
  }
  if (learn_embeddings) {
    // Inversion starts from the statistics of the embeddings the network
    // actually saw.
    double sum = 0.0, sq = 0.0, n = 0.0;
    for (Tensor& d : descriptors) {
      d.set_requires_grad(false);
      for (double v : d.data()) {
        sum += v;
        sq += v * v;
        n += 1.0;
      }
    }
    const double mean = sum / n;
    model.set_stat("descriptor_mean", mean);
    model.set_stat("descriptor_std", std::sqrt(std::max(sq / n - mean * mean, 1e-12)));
  }
  model.set_stat("p_uncond", config.p_uncond);
  model.set_stat("train_steps", config.steps);
  if (!log.loss.empty()) {
    const std::size_t tail = std::max<std::size_t>(1, log.loss.size() / 10);
    double s = 0.0;
    for (std::size_t i = log.loss.size() - tail; i < log.loss.size(); ++i) s += log.loss[i];
    model.set_stat("train_final_loss", s / static_cast<double>(tail));
  }
  return log;
}

double HeldOutNoiseMse(const Model& model, std::span<const Tensor> images, int draws, bool use_null,
                       uint64_t seed) {
  if (images.empty() || draws < 1) throw ParameterError("need images and at least one draw");
  NoGradGuard no_grad;
  Rng rng(seed);
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    const Tensor& x = images[static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<int64_t>(images.size()) - 1))];
    const int t = static_cast<int>(rng.UniformInt(1, model.schedule().steps()));
    const Tensor z0 = model.ToLatent(x);
    const Tensor eps = StandardNormal(rng, z0.shape());
    const Tensor z_t = QSample(model.schedule(), z0, t, eps);
    const Condition c = use_null ? Condition::Null() : Condition::Embedding(model.ImageDescriptor(x));
    sum += MseLoss(PredictNoise(model.net(), z_t, t, c), eps).item();
  }
  return sum / draws;
}

}  // namespace gicx
