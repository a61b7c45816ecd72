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

#include "gicx/inversion/inversion.h"

#include <cmath>
#include <sstream>

#include "gicx/diffusion/sampler.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"
#include "gicx/numerics/optimizer.h"

namespace gicx {

void InversionConfig::Validate() const {
  if (steps < 1) throw ParameterError("inversion needs at least one step");
  if (draws_per_step < 1) throw ParameterError("draws_per_step must be at least 1");
  if (!(learning_rate > 0.0)) throw ParameterError("inversion learning rate must be positive");
}

std::string InversionResult::LossCsv() const {
  std::ostringstream out;
  out.precision(17);
  out << "step,t,loss\n";
  for (std::size_t i = 0; i < loss.size(); ++i) out << i << "," << t[i] << "," << loss[i] << "\n";
  return out.str();
}

QuantizerSpec DefaultEmbeddingQuantizer(const Model& model, uint32_t levels) {
  const double m = model.stat("descriptor_mean");
  const double s = model.stat("descriptor_std");
  QuantizerSpec q{m - 5.0 * s, m + 5.0 * s, levels};
  q.Validate();
  return q;
}

Tensor InitialEmbedding(const Model& model, Rng& rng) {
  const double m = model.stat("descriptor_mean");
  const double s = model.stat("descriptor_std");
  const auto& c = model.config().net;
  std::vector<double> v(static_cast<std::size_t>(c.tokens) * c.dims);
  for (double& x : v) x = m + s * rng.Normal();
  return Tensor({c.tokens, c.dims}, std::move(v));
}

Tensor StraightThroughQuantize(const Tensor& e, const QuantizerSpec& q) {
  q.Validate();
  std::vector<double> out(e.data().begin(), e.data().end());
  for (double& v : out) v = QuantizeValue(v, q);
  return RecordOp(e.shape(), std::move(out), {e}, {[](const GradContext& ctx) {
                    if (!ctx.inputs[0]) return;
                    auto& dx = *ctx.inputs[0];
                    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ctx.output_grad[i];
                  }});
}

InversionResult InvertEmbedding(Model& model, const Tensor& image, const InversionConfig& config) {
  config.Validate();
  model.SetTrainable(false);
  const Tensor z0 = [&] {
    NoGradGuard no_grad;
    return model.ToLatent(image).Detach();
  }();
  const NoiseSchedule& schedule = model.schedule();
  Rng rng(config.seed);

  InversionResult result;
  result.quantizer = config.quantizer.min == config.quantizer.max
                         ? DefaultEmbeddingQuantizer(model, config.quantizer.levels)
                         : config.quantizer;
  result.quantizer.Validate();
  result.initial = InitialEmbedding(model, rng);
  Tensor e = result.initial.Detach();
  e.set_requires_grad(true);
  Adam opt({e}, {.learning_rate = config.learning_rate});
  opt.ZeroGrad();
  for (int step = 0; step < config.steps; ++step) {
    const Tensor used = config.quantize_in_loop ? StraightThroughQuantize(e, result.quantizer) : e;
    const Condition cond = Condition::Embedding(used);
    Tensor total = Tensor::Scalar(0.0);
    for (int d = 0; d < config.draws_per_step; ++d) {
      const int t = static_cast<int>(rng.UniformInt(1, schedule.steps()));
      if (d == 0) result.t.push_back(t);
      const Tensor eps = StandardNormal(rng, z0.shape());
      const Tensor z_t = QSample(schedule, z0, t, eps);
      total = Add(total, MseLoss(PredictNoise(model.net(), z_t, t, cond), eps));
    }
    total = Scale(total, 1.0 / config.draws_per_step);
    result.loss.push_back(total.item());
    Backward(total);
    opt.Step();
  }
  e.set_requires_grad(false);
  result.embedding = e.Detach();
  std::vector<double> q(e.data().begin(), e.data().end());
  for (double& v : q) v = QuantizeValue(v, result.quantizer);
  result.quantized = Tensor(e.shape(), std::move(q));
  return result;
}

double EmbeddingLoss(const Model& model, const Tensor& image, const Tensor& embedding, int trials,
                     uint64_t seed) {
  if (trials < 1) throw ParameterError("need at least one trial");
  NoGradGuard no_grad;
  const Tensor z0 = model.ToLatent(image);
  const Condition cond = Condition::Embedding(embedding);
  Rng rng(seed);
  double sum = 0.0;
  for (int i = 0; i < trials; ++i) {
    const int t = static_cast<int>(rng.UniformInt(1, model.schedule().steps()));
    const Tensor eps = StandardNormal(rng, z0.shape());
    const Tensor z_t = QSample(model.schedule(), z0, t, eps);
    sum += MseLoss(PredictNoise(model.net(), z_t, t, cond), eps).item();
  }
  return sum / trials;
}

UtilityReport EmbeddingUtilityCheck(const Model& model, const Tensor& image,
                                    const Tensor& learned, const Tensor& random, int trials,
                                    uint64_t seed) {
  if (learned.shape() != random.shape()) {
    throw DimensionError("embeddings differ in shape: " + ShapeToString(learned.shape()) +
                         " vs " + ShapeToString(random.shape()));
  }
  UtilityReport r;
  r.trials = trials;
  r.learned_mean = EmbeddingLoss(model, image, learned, trials, seed);
  r.random_mean = EmbeddingLoss(model, image, random, trials, seed);
  r.relative_gap = (r.random_mean - r.learned_mean) / r.random_mean;
  r.high_variance = trials < 2;
  r.pass = r.learned_mean < r.random_mean;
  return r;
}

}  // namespace gicx
