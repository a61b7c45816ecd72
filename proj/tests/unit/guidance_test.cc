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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gicx/backbone/model.h"
#include "gicx/diffusion/sampler.h"
#include "gicx/guidance/guidance.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"
#include "test_util.h"

namespace gicx {
namespace {

using testing::FiniteDifferenceGradient;
using testing::RandomTensor;
using testing::RelativeError;
using testing::ToVector;

ModelConfig TinyConfig() {
  ModelConfig c;
  c.image_height = 8;
  c.image_width = 8;
  c.net.widths = {4, 4, 4};
  c.net.embed_dim = 8;
  c.net.tokens = 2;
  c.net.dims = 4;
  c.net.cond_hidden = 4;
  return c;
}

// A tiny model whose condition path is live (random output projection).
Model TinyModel(uint64_t seed = 3) {
  ModelConfig c = TinyConfig();
  c.seed = seed;
  Model m(c);
  Rng rng(seed + 100);
  for (auto& [name, t] : m.net().params().entries()) {
    if (name.rfind("cond.", 0) == 0) {
      auto w = Tensor(t).mutable_leaf_data();
      for (double& v : w) v = 0.3 * rng.Normal();
    }
  }
  m.SetTrainable(false);
  return m;
}

const GuidanceProxy kIdentityProxy([](const Tensor& z) { return z; });

TEST(CfgCombineTest, Endpoints) {
  Rng rng(1);
  const Tensor c = RandomTensor(rng, {3, 4, 4}), u = RandomTensor(rng, {3, 4, 4});
  EXPECT_EQ(ToVector(CfgCombine(c, u, 1.0).data()), ToVector(c.data()));
  EXPECT_EQ(ToVector(CfgCombine(c, u, 0.0).data()), ToVector(u.data()));
  EXPECT_DOUBLE_EQ(CfgCombine(Tensor::Scalar(1.0), Tensor::Scalar(0.0), 0.95).item(), 0.95);
  EXPECT_THROW(CfgCombine(c, Tensor::Zeros({3, 4, 2}), 0.5), DimensionError);
  const Tensor mid = CfgCombine(c, u, 2.5);
  for (int i = 0; i < mid.numel(); ++i) EXPECT_NEAR(mid[i], u[i] + 2.5 * (c[i] - u[i]), 1e-15);
}

TEST(PerturbMeanTest, ScalarExample) {
  EXPECT_DOUBLE_EQ(PerturbMean(Tensor::Scalar(1.0), 0.01, Tensor::Scalar(1.0), 215.0).item(),
                   1.0 - 2.15);
  EXPECT_NEAR(PerturbMean(Tensor::Scalar(1.0), 0.01, Tensor::Scalar(1.0), 215.0).item(), -1.15,
              1e-12);
}

TEST(PerturbMeanTest, NeutralCases) {
  Rng rng(2);
  const auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  const Tensor mu = RandomTensor(rng, {3, 4, 4}), g = RandomTensor(rng, {3, 4, 4});
  EXPECT_EQ(ToVector(PerturbMean(mu, s, 500, g, 0.0).data()), ToVector(mu.data()));
  EXPECT_EQ(ToVector(PerturbMean(mu, s, 500, Tensor::Zeros(mu.shape()), 215.0).data()),
            ToVector(mu.data()));
  EXPECT_THROW(PerturbMean(mu, s, 500, Tensor::Zeros({3, 4, 2}), 1.0), DimensionError);
}

TEST(PerturbMeanTest, LinearInScale) {
  Rng rng(3);
  const auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  const Tensor zero = Tensor::Zeros({2, 4, 4});
  const Tensor mu = RandomTensor(rng, {2, 4, 4}), g = RandomTensor(rng, {2, 4, 4});
  for (int t : {2, 50, 999}) {
    for (double sc : {0.5, 25.0, 215.0}) {
      // From a zero mean the shift is exact in floating point.
      const Tensor d1 = PerturbMean(zero, s, t, g, sc), d2 = PerturbMean(zero, s, t, g, 2 * sc);
      for (int i = 0; i < g.numel(); ++i) EXPECT_EQ(d2[i], 2.0 * d1[i]);
      const Tensor p1 = PerturbMean(mu, s, t, g, sc), p2 = PerturbMean(mu, s, t, g, 2 * sc);
      for (int i = 0; i < g.numel(); ++i) {
        EXPECT_NEAR(p2[i] - mu[i], 2.0 * (p1[i] - mu[i]), 1e-12 * (1.0 + std::abs(mu[i])));
      }
    }
  }
}

TEST(CompressionGradientTest, ZeroWhenProxyMatchesReference) {
  Rng rng(4);
  const auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  const Tensor z = RandomTensor(rng, {3, 8, 8}), eps = RandomTensor(rng, {3, 8, 8});
  const Tensor ref = kIdentityProxy(PredictX0(s, z, 300, eps));
  const Tensor g = CompressionGradient(kIdentityProxy, s, z, 300, eps, ref);
  for (double v : g.data()) EXPECT_EQ(v, 0.0);
}

TEST(CompressionGradientTest, SignOverSixteenOracle) {
  // eps_hat = 0 so x0 = z / sqrt(abar_t); each 4x4 block feeds one pooled
  // value, so dL/dz = sign(mean - target) / (16 sqrt(abar_t)).
  const auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  Rng rng(5);
  const Tensor z = RandomTensor(rng, {3, 4, 4}, 0.0, 1.0);
  const Tensor ref({3, 1, 1}, {2.0, -1.0, 0.3});
  for (int t : {1, 10, 400}) {
    const Tensor g = CompressionGradient(kIdentityProxy, s, z, t, Tensor::Zeros(z.shape()), ref);
    const double root = std::sqrt(s.alpha_bar(t));
    for (int c = 0; c < 3; ++c) {
      double mean = 0.0;
      for (int i = 0; i < 16; ++i) mean += z[c * 16 + i] / root;
      mean /= 16.0;
      const double expected = (mean > ref[c] ? 1.0 : -1.0) / (16.0 * root);
      for (int i = 0; i < 16; ++i) EXPECT_NEAR(g[c * 16 + i], expected, 1e-15) << t;
    }
  }
}

// Central differences of the guidance loss against the tape gradient, for
// two proxies: plain pooling and a random smooth decoder.
TEST(CompressionGradientTest, MatchesFiniteDifferences) {
  const auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  const Model model = TinyModel();
  Rng wrng(9);
  const Tensor mix = RandomTensor(wrng, {3, 3, 3, 3}, -0.4, 0.4);
  const GuidanceProxy smooth([&](const Tensor& z) { return Silu(Conv2d(z, mix, 1, 1)); });
  int checked = 0;
  for (uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const int t = static_cast<int>(rng.UniformInt(1, 1000));
    const GuidanceProxy& proxy = seed % 2 ? smooth : kIdentityProxy;
    const Tensor z = RandomTensor(rng, {3, 8, 8}), eps = RandomTensor(rng, {3, 8, 8});
    Tensor ref = RandomTensor(rng, {3, 2, 2}, -2.0, 2.0);
    const Tensor pooled = proxy(PredictX0(s, z, t, eps));
    bool near_kink = false;
    for (int i = 0; i < ref.numel(); ++i) near_kink |= std::abs(pooled[i] - ref[i]) < 1e-3;
    if (near_kink) continue;
    const Tensor g = CompressionGradient(proxy, s, z, t, eps, ref);
    const auto fd = FiniteDifferenceGradient(
        [&](const std::vector<double>& v) {
          NoGradGuard no_grad;
          return GuidanceLoss(proxy, PredictX0(s, Tensor(z.shape(), v), t, eps), ref).item();
        },
        ToVector(z.data()), 1e-6 * std::sqrt(s.alpha_bar(t)));
    EXPECT_LT(RelativeError(ToVector(g.data()), fd), 1e-4) << "seed " << seed;
    ++checked;
  }
  EXPECT_GE(checked, 50);
}

TEST(CompressionGradientTest, FullBackpropMatchesFiniteDifferences) {
  const Model model = TinyModel();
  const auto& s = model.schedule();
  Rng rng(12);
  const Tensor e = RandomTensor(rng, {2, 4});
  auto eps_fn = [&](const Tensor& z, int t) {
    return PredictNoise(model.net(), z, t, Condition::Embedding(e));
  };
  int checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const int t = static_cast<int>(rng.UniformInt(50, 900));
    const Tensor z = RandomTensor(rng, {3, 8, 8});
    const Tensor ref = RandomTensor(rng, {3, 2, 2}, -3.0, 3.0);
    const Tensor g = CompressionGradientFull(
        kIdentityProxy, s, z, t, [&](const Tensor& zz) { return eps_fn(zz, t); }, ref);
    const auto fd = FiniteDifferenceGradient(
        [&](const std::vector<double>& v) {
          NoGradGuard no_grad;
          const Tensor zz(z.shape(), v);
          return GuidanceLoss(kIdentityProxy, PredictX0(s, zz, t, eps_fn(zz, t)), ref).item();
        },
        ToVector(z.data()), 1e-6);
    EXPECT_LT(RelativeError(ToVector(g.data()), fd), 1e-4) << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 6);
}

TEST(CompressionGradientTest, RejectsReferenceShape) {
  const auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  const Tensor z = Tensor::Zeros({3, 8, 8});
  EXPECT_THROW(CompressionGradient(kIdentityProxy, s, z, 5, z, Tensor::Zeros({3, 4, 4})),
               DimensionError);
}

TEST(FoldTest, DualPathDdpmEquivalence) {
  const auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const int t = static_cast<int>(rng.UniformInt(1, 1000));
    const double sc = 300.0 * rng.Uniform();
    const Tensor z = RandomTensor(rng, {3, 4, 4}, -3, 3), eps = RandomTensor(rng, {3, 4, 4}, -3, 3);
    const Tensor g = RandomTensor(rng, {3, 4, 4}, -0.1, 0.1);
    Rng noise_a(seed + 1000), noise_b(seed + 1000);
    const Tensor via_mean = DdpmStepFromMean(
        s, PerturbMean(DdpmPosteriorMean(s, z, t, eps), s, t, g, sc), t, noise_a);
    const Tensor via_eps = DdpmStep(s, z, t, FoldGuidanceIntoEps(eps, s, t, g, sc), noise_b);
    for (int i = 0; i < z.numel(); ++i) {
      ASSERT_NEAR(via_mean[i], via_eps[i], 1e-10) << "t=" << t << " s_c=" << sc;
    }
  }
}

TEST(GuidedDenoiseTest, NeutralSettingsReproducePlainPredictions) {
  const Model model = TinyModel();
  Rng rng(6);
  const Tensor e = RandomTensor(rng, {2, 4});
  const Tensor z = RandomTensor(rng, {3, 8, 8});
  GuidanceConfig config{
      .s_f = 1.0, .s_c = 0.0, .reference = Tensor::Zeros({3, 2, 2}), .clamp_x0 = false};
  const auto proxy = GuidanceProxy::ForModel(model);
  const auto cond = PredictNoise(model.net(), z, 77, Condition::Embedding(e));
  const auto null = PredictNoise(model.net(), z, 77, Condition::Null());
  EXPECT_EQ(ToVector(GuidedDenoiseFn(model, config, proxy, e)(z, 77).data()), ToVector(cond.data()));
  config.s_f = 0.0;
  EXPECT_EQ(ToVector(GuidedDenoiseFn(model, config, proxy, e)(z, 77).data()), ToVector(null.data()));
  EXPECT_NE(ToVector(cond.data()), ToVector(null.data()));
}

TEST(GuidedDenoiseTest, ZeroScaleSamplingIsBitIdentical) {
  const Model model = TinyModel();
  Rng rng(7);
  const Tensor e = RandomTensor(rng, {2, 4});
  const auto proxy = GuidanceProxy::ForModel(model);
  GuidanceConfig config{.s_f = 0.95, .s_c = 0.0, .reference = RandomTensor(rng, {3, 2, 2})};
  const SamplerConfig sampler{.num_steps = 10, .eta = 1.0, .seed = 42};
  const Tensor guided = SampleLoop(model.schedule(), GuidedDenoiseFn(model, config, proxy, e),
                                   sampler, model.latent_shape());
  const DenoiseFn plain = [&](const Tensor& z, int t) {
    NoGradGuard no_grad;
    return ClampPredictedNoise(
        model.schedule(), z, t,
        CfgCombine(PredictNoise(model.net(), z, t, Condition::Embedding(e)),
                   PredictNoise(model.net(), z, t, Condition::Null()), 0.95),
        model.latent_bounds());
  };
  const Tensor unguided = SampleLoop(model.schedule(), plain, sampler, model.latent_shape());
  EXPECT_EQ(ToVector(guided.data()), ToVector(unguided.data()));
  config.s_c = 50.0;
  const Tensor pushed = SampleLoop(model.schedule(), GuidedDenoiseFn(model, config, proxy, e),
                                   sampler, model.latent_shape());
  EXPECT_NE(ToVector(pushed.data()), ToVector(unguided.data()));
}

TEST(ClampPredictedNoiseTest, MatchesClampedCleanEstimate) {
  const auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  const LatentBounds bounds{{-1.0, -0.5}, {1.0, 0.5}};
  Rng rng(12);
  for (int t : {1, 10, 300, 999, 1000}) {
    const Tensor z = RandomTensor(rng, {2, 3, 3}, -2.0, 2.0);
    const Tensor eps = RandomTensor(rng, {2, 3, 3}, -2.0, 2.0);
    const Tensor x0 = PredictX0(s, z, t, eps);
    const Tensor fixed = ClampPredictedNoise(s, z, t, eps, bounds);
    const Tensor x0c = PredictX0(s, z, t, fixed);
    for (int i = 0; i < z.numel(); ++i) {
      const int c = i / 9;
      const double want = std::clamp(x0[i], bounds.lo[c], bounds.hi[c]);
      if (want == x0[i]) {
        EXPECT_EQ(fixed[i], eps[i]);  // untouched when already in range
      } else {
        EXPECT_NEAR(x0c[i], want, 1e-9 * (1.0 + std::abs(x0[i]))) << "t=" << t << " i=" << i;
      }
    }
  }
  EXPECT_THROW(ClampPredictedNoise(s, Tensor::Zeros({3, 3, 3}), 5, Tensor::Zeros({3, 3, 3}),
                                   bounds),
               DimensionError);
}

TEST(GuidedDenoiseTest, ValidatesConfig) {
  const Model model = TinyModel();
  const auto proxy = GuidanceProxy::ForModel(model);
  const Tensor e = Tensor::Zeros({2, 4});
  EXPECT_THROW(GuidedDenoiseFn(model, {.s_c = -1.0, .reference = Tensor::Zeros({3, 2, 2})},
                               proxy, e),
               ParameterError);
  EXPECT_THROW(GuidedDenoiseFn(model, {.s_c = 1.0, .reference = Tensor::Zeros({3, 4, 4})}, proxy,
                               e),
               DimensionError);
}

// A guided DDPM mean lowers the guidance loss at first order: stepping from
// z_t by mu_hat - mu (= -s_c sigma^2 grad) reduces it once the step is small.
TEST(GuidedDenoiseTest, GuidedStepDescends) {
  const auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  Rng wrng(10);
  const Tensor mix = RandomTensor(wrng, {3, 3, 3, 3}, -0.4, 0.4);
  const GuidanceProxy smooth([&](const Tensor& z) { return Silu(Conv2d(z, mix, 1, 1)); });
  for (uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const int t = static_cast<int>(rng.UniformInt(2, 1000));
    // Smooth instance: low-frequency z and eps.
    const Tensor z = UpsampleNearest(RandomTensor(rng, {3, 2, 2}), 4);
    const Tensor eps = UpsampleNearest(RandomTensor(rng, {3, 2, 2}), 4);
    const Tensor ref = RandomTensor(rng, {3, 2, 2}, -1, 1);
    auto loss = [&](const Tensor& zz) {
      NoGradGuard no_grad;
      return GuidanceLoss(smooth, PredictX0(s, zz, t, eps), ref).item();
    };
    const Tensor g = CompressionGradient(smooth, s, z, t, eps, ref);
    const Tensor mu = DdpmPosteriorMean(s, z, t, eps);
    double sc = 1000.0;
    bool descended = false;
    for (int halving = 0; halving < 40 && !descended; ++halving, sc /= 2) {
      const Tensor shift = Sub(PerturbMean(mu, s, t, g, sc), mu);
      descended = loss(Add(z, shift)) < loss(z);
    }
    EXPECT_TRUE(descended) << "seed " << seed;
  }
}

}  // namespace
}  // namespace gicx
