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

#include <gtest/gtest.h>

#include <cmath>

#include "gicx/diffusion/sampler.h"
#include "gicx/diffusion/schedule.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"
#include "test_util.h"

namespace gicx {
namespace {

using testing::RandomTensor;
using testing::ToVector;

TEST(ScheduleTest, SingleStep) {
  auto s = NoiseSchedule::Linear(1, 1e-4, 1e-4);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 0.9999);
  EXPECT_EQ(s.posterior_variance(1), 0.0);
}

TEST(ScheduleTest, DefaultLinearEndpointMatchesScalarLoop) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  double prod = 1.0;
  for (int i = 0; i < 1000; ++i) prod *= 1.0 - (1e-4 + (0.02 - 1e-4) * i / 999.0);
  EXPECT_NEAR(s.alpha_bar(1000), prod, 1e-15);
  EXPECT_NEAR(s.alpha_bar(1000), 4.0e-5, 0.02 * 4.0e-5);
}

TEST(ScheduleTest, InvariantsHold) {
  for (auto [steps, lo, hi] : {std::tuple{1000, 1e-4, 0.02}, std::tuple{50, 1e-3, 0.3},
                               std::tuple{7, 0.1, 0.1}}) {
    auto s = NoiseSchedule::Linear(steps, lo, hi);
    double prod = 1.0;
    for (int t = 1; t <= steps; ++t) {
      EXPECT_GT(s.beta(t), 0.0);
      EXPECT_LT(s.beta(t), 1.0);
      prod *= s.alpha(t);
      EXPECT_NEAR(s.alpha_bar(t), prod, 1e-12);
      EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
      EXPECT_GE(s.sigma(t), 0.0);
    }
  }
}

TEST(ScheduleTest, RejectsInvalidParameters) {
  EXPECT_THROW(NoiseSchedule::Linear(0, 1e-4, 0.02), ParameterError);
  EXPECT_THROW(NoiseSchedule::Linear(10, 0.0, 0.02), ParameterError);
  EXPECT_THROW(NoiseSchedule::Linear(10, 0.03, 0.02), ParameterError);
  EXPECT_THROW(NoiseSchedule::Linear(10, 1e-4, 1.0), ParameterError);
}

TEST(QSampleTest, NoiseFreeBranchAndRange) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  Tensor z0({3}, {1.0, -2.0, 0.5});
  Tensor zt = QSample(s, z0, 500, Tensor::Zeros({3}));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(zt[i], std::sqrt(s.alpha_bar(500)) * z0[i]);
  EXPECT_THROW(QSample(s, z0, 0, Tensor::Zeros({3})), ParameterError);
  EXPECT_THROW(QSample(s, z0, 1001, Tensor::Zeros({3})), ParameterError);
}

TEST(QSampleTest, EarlyChainIsNearIdentity) {
  auto s = NoiseSchedule::Linear(1000, 1e-6, 0.02);
  Rng rng(2);
  Tensor z0 = RandomTensor(rng, {16});
  Tensor zt = QSample(s, z0, 1, StandardNormal(rng, {16}));
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(zt[i], z0[i], 1e-2);
}

TEST(QSampleTest, MonteCarloMoments) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  const int t = 300;
  const double z0 = 0.8;
  Rng rng(4);
  double sum = 0.0, sq = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double v = QSample(s, Tensor({1}, {z0}), t, Tensor({1}, {rng.Normal()})).item();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, std::sqrt(s.alpha_bar(t)) * z0, 0.05 * std::sqrt(s.alpha_bar(t)) * z0);
  EXPECT_NEAR(var, 1.0 - s.alpha_bar(t), 0.05 * (1.0 - s.alpha_bar(t)));
}

TEST(PredictX0Test, InvertsQSampleAtEveryTimestep) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  Rng rng(8);
  for (int t = 1; t <= 1000; ++t) {
    Tensor z0 = RandomTensor(rng, {4});
    Tensor eps = StandardNormal(rng, {4});
    Tensor back = PredictX0(s, QSample(s, z0, t, eps), t, eps);
    for (int i = 0; i < 4; ++i) ASSERT_NEAR(back[i], z0[i], 1e-10) << "t=" << t;
  }
}

TEST(PredictX0Test, ZeroNoiseDividesBySqrtAlphaBar) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  Tensor zt({2}, {0.3, -1.1});
  Tensor x0 = PredictX0(s, zt, 700, Tensor::Zeros({2}));
  for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(x0[i], zt[i] / std::sqrt(s.alpha_bar(700)));
}

TEST(DdpmMeanTest, ScalarFormula) {
  const double mu =
      DdpmPosteriorMean(Tensor({1}, {1.0}), Tensor({1}, {1.0}), 0.5, 0.02).item();
  // Hand-evaluated: (1 - 0.02 / sqrt(0.5)) / sqrt(0.98)
  EXPECT_NEAR(mu, (1.0 - 0.02 / std::sqrt(0.5)) / std::sqrt(0.98), 1e-15);
  EXPECT_NEAR(mu, 0.9817, 2e-4);
}

TEST(DdpmMeanTest, NoNoiseNoStepLimitAndLinearity) {
  auto tiny = NoiseSchedule::Linear(10, 1e-9, 1e-9);
  Tensor z({2}, {0.4, -0.7});
  Tensor mu = DdpmPosteriorMean(tiny, z, 5, Tensor::Zeros({2}));
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(mu[i], z[i], 1e-8);

  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  Rng rng(1);
  Tensor a = RandomTensor(rng, {5}), b = RandomTensor(rng, {5}), e = RandomTensor(rng, {5});
  // Affine in z_t: mu(a + b) - mu(b) == mu(a) - mu(0).
  auto lhs = Sub(DdpmPosteriorMean(s, Add(a, b), 400, e), DdpmPosteriorMean(s, b, 400, e));
  auto rhs = Sub(DdpmPosteriorMean(s, a, 400, e), DdpmPosteriorMean(s, Tensor::Zeros({5}), 400, e));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-12);
}

TEST(DdimTest, DeterministicWithoutEta) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  Rng data(3);
  Tensor z = RandomTensor(data, {8}), eps = RandomTensor(data, {8});
  Rng r1(1), r2(2);
  auto a = DdimStep(s, z, 600, 550, eps, 0.0, r1);
  auto b = DdimStep(s, z, 600, 550, eps, 0.0, r2);
  EXPECT_EQ(ToVector(a.data()), ToVector(b.data()));
}

TEST(DdimTest, OracleNoiseLandsOnForwardTrajectory) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  Rng rng(5);
  Tensor z0 = RandomTensor(rng, {6});
  Tensor eps = StandardNormal(rng, {6});
  for (auto [t, tp] : {std::pair{1000, 950}, std::pair{500, 1}, std::pair{20, 0}}) {
    Tensor step = DdimStep(s, QSample(s, z0, t, eps), t, tp, eps, 0.0, rng);
    Tensor expected = tp == 0 ? z0 : QSample(s, z0, tp, eps);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(step[i], expected[i], 1e-10);
  }
}

TEST(DdimTest, EtaOneMatchesPosteriorVariance) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  for (int t = 1; t <= 1000; ++t) {
    const double sigma = DdimSigma(s, t, t - 1, 1.0);
    // Closed form of the DDPM posterior variance, computed independently.
    const double ab = s.alpha_bar(t), ab_prev = s.alpha_bar(t - 1);
    const double expected = (1.0 - ab_prev) / (1.0 - ab) * (1.0 - ab / ab_prev);
    ASSERT_NEAR(sigma * sigma, expected, 1e-12);
    ASSERT_NEAR(sigma * sigma, s.posterior_variance(t), 1e-12);
  }
}

TEST(DdimTest, RejectsBadOrdering) {
  auto s = NoiseSchedule::Linear(100, 1e-4, 0.02);
  Rng rng(0);
  Tensor z = Tensor::Zeros({2});
  EXPECT_THROW(DdimStep(s, z, 10, 10, z, 0.0, rng), ParameterError);
  EXPECT_THROW(DdimStep(s, z, 10, 20, z, 0.0, rng), ParameterError);
  EXPECT_THROW(DdimStep(s, z, 10, 5, z, 1.5, rng), ParameterError);
}

TEST(TimestepGridTest, CoversEndsAndDecreases) {
  for (auto [total, n] : {std::pair{1000, 100}, std::pair{1000, 20}, std::pair{1000, 1000},
                          std::pair{10, 3}, std::pair{1000, 7}}) {
    auto grid = TimestepGrid(total, n);
    ASSERT_EQ(grid.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(grid.front(), total);
    EXPECT_EQ(grid.back(), 1);
    for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_LT(grid[i], grid[i - 1]);
  }
  EXPECT_EQ(TimestepGrid(1000, 1), (std::vector<int>{1000}));
  EXPECT_THROW(TimestepGrid(10, 11), ParameterError);
}

TEST(SampleLoopTest, SingleStepClosedForm) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  SamplerConfig cfg{.num_steps = 1, .eta = 0.0, .seed = 17};
  Tensor out = SampleLoop(s, [](const Tensor& z, int) { return Tensor::Zeros(z.shape()); }, cfg,
                          {3, 2, 2});
  Rng rng(17);
  Tensor z_T = StandardNormal(rng, {3, 2, 2});
  for (int i = 0; i < 12; ++i) EXPECT_DOUBLE_EQ(out[i], z_T[i] / std::sqrt(s.alpha_bar(1000)));
}

TEST(SampleLoopTest, FixedSeedIsBitIdentical) {
  auto s = NoiseSchedule::Linear(1000, 1e-4, 0.02);
  auto fn = [](const Tensor& z, int t) { return Scale(z, 0.5 + 1e-4 * t); };
  for (double eta : {0.0, 1.0}) {
    SamplerConfig cfg{.num_steps = 25, .eta = eta, .seed = 42};
    auto a = SampleLoop(s, fn, cfg, {2, 4, 4});
    auto b = SampleLoop(s, fn, cfg, {2, 4, 4});
    EXPECT_EQ(ToVector(a.data()), ToVector(b.data()));
  }
}

TEST(SampleLoopTest, WrongCallbackShapeIsContractError) {
  auto s = NoiseSchedule::Linear(100, 1e-4, 0.02);
  SamplerConfig cfg{.num_steps = 5, .eta = 0.0, .seed = 1};
  EXPECT_THROW(SampleLoop(s, [](const Tensor&, int) { return Tensor::Zeros({1}); }, cfg, {4}),
               ContractError);
  cfg.num_steps = 0;
  EXPECT_THROW(SampleLoop(s, [](const Tensor& z, int) { return z; }, cfg, {4}), ParameterError);
}

}  // namespace
}  // namespace gicx
