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
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "gicx/backbone/trainer.h"
#include "gicx/inversion/inversion.h"
#include "gicx/metrics/toy_dataset.h"
#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"
#include "test_util.h"

namespace gicx {
namespace {

using testing::RandomTensor;
using testing::ToVector;

ModelConfig SmallConfig() {
  ModelConfig c;
  c.image_height = 8;
  c.image_width = 8;
  c.net.widths = {8, 8, 8};
  c.net.embed_dim = 16;
  c.net.tokens = 2;
  c.net.dims = 8;
  c.net.cond_hidden = 8;
  return c;
}

std::vector<Tensor> SmallImages(int count, uint64_t seed) {
  return GenerateToyDataset({.count = count, .height = 8, .width = 8, .seed = seed});
}

// One briefly trained model shared by the tests that need a live condition
// path.
class TrainedModelTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    model_ = std::make_unique<Model>(SmallConfig());
    TrainDenoiser(*model_, SmallImages(32, 10), {.steps = 400, .batch = 4, .learning_rate = 3e-3, .embedding_learning_rate = 0.01});
    model_->SetTrainable(false);
  }
  static void TearDownTestSuite() { model_.reset(); }
  static std::unique_ptr<Model> model_;
};
std::unique_ptr<Model> TrainedModelTest::model_;

TEST(StraightThroughTest, ForwardSnapsToGrid) {
  const QuantizerSpec q{-1.0, 1.0, 5};
  const Tensor on_grid({4}, {-1.0, -0.5, 0.5, 1.0});
  EXPECT_EQ(ToVector(StraightThroughQuantize(on_grid, q).data()), ToVector(on_grid.data()));
  Rng rng(1);
  const Tensor e = RandomTensor(rng, {1000});
  const Tensor qe = StraightThroughQuantize(e, q);
  for (int i = 0; i < e.numel(); ++i) {
    EXPECT_LE(std::abs(qe[i] - e[i]), q.step() / 2 + 1e-15);
    EXPECT_EQ(qe[i], QuantizeValue(e[i], q));
  }
}

TEST(StraightThroughTest, GradientIsIdentity) {
  Rng rng(2);
  Tensor e = RandomTensor(rng, {3, 4}, -3.0, 3.0);  // some entries clamp
  e.set_requires_grad(true);
  Backward(Sum(StraightThroughQuantize(e, {-1.0, 1.0, 16})));
  for (double g : e.grad()) EXPECT_EQ(g, 1.0);
}

TEST(InversionTest, SeveredConditionGivesZeroGradient) {
  // A fresh net's condition projection outputs exactly zero.
  Model m(SmallConfig());
  FitDataStatistics(m, SmallImages(4, 1));
  const Tensor x = SmallImages(1, 5)[0];
  const InversionResult r = InvertEmbedding(m, x, {.steps = 20, .seed = 3});
  EXPECT_EQ(ToVector(r.embedding.data()), ToVector(r.initial.data()));
}

TEST(InversionTest, RejectsBadInputs) {
  Model m(SmallConfig());
  FitDataStatistics(m, SmallImages(4, 1));
  EXPECT_THROW(InvertEmbedding(m, GenerateToyDataset({.count = 1, .height = 12, .width = 8})[0],
                               {.steps = 1}),
               ParameterError);
  EXPECT_THROW(InvertEmbedding(m, SmallImages(1, 1)[0], {.steps = 0}), ParameterError);
  EXPECT_THROW(InvertEmbedding(m, SmallImages(1, 1)[0], {.steps = 1, .draws_per_step = 0}),
               ParameterError);
}

TEST(InversionTest, PaperPresetIsAccepted) {
  EXPECT_EQ(kPaperInversionPreset.tokens, 64);
  EXPECT_EQ(kPaperInversionPreset.dims, 768);
  EXPECT_EQ(kPaperInversionPreset.steps, 4000);
  EXPECT_EQ(kPaperInversionPreset.tokens * kPaperInversionPreset.dims, 49152);
  const InversionConfig c{.steps = kPaperInversionPreset.steps};
  EXPECT_NO_THROW(c.Validate());
  ModelConfig mc;
  mc.net.tokens = kPaperInversionPreset.tokens;
  mc.net.dims = kPaperInversionPreset.dims;
  mc.net.widths = {4, 4, 4};
  const Model m(mc);
  EXPECT_EQ(m.net().config().tokens, 64);
  EXPECT_EQ(m.net().config().dims, 768);
}

TEST_F(TrainedModelTest, LossDescendsAndWeightsStayFrozen) {
  const uint64_t before = model_->net().params().Checksum();
  const Tensor x = SmallImages(1, 42)[0];
  const InversionResult r = InvertEmbedding(*model_, x, {.steps = 500, .seed = 1});
  ASSERT_EQ(r.loss.size(), 500u);
  // The per-step trace is dominated by the t draw; compare on paired draws.
  EXPECT_LT(EmbeddingLoss(*model_, x, r.embedding, 512, 11),
            EmbeddingLoss(*model_, x, r.initial, 512, 11));
  EXPECT_EQ(model_->net().params().Checksum(), before);
  for (const auto& [name, t] : model_->net().params().entries()) {
    EXPECT_FALSE(t.requires_grad()) << name;
  }
}

TEST_F(TrainedModelTest, ShippedEmbeddingIsOnGridAndReproducible) {
  const Tensor x = SmallImages(1, 43)[0];
  const InversionConfig config{.steps = 40, .seed = 9};
  const InversionResult a = InvertEmbedding(*model_, x, config);
  const InversionResult b = InvertEmbedding(*model_, x, config);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(ToVector(a.quantized.data()), ToVector(b.quantized.data()));
  EXPECT_EQ(a.quantizer, DefaultEmbeddingQuantizer(*model_));
  for (int i = 0; i < a.quantized.numel(); ++i) {
    EXPECT_EQ(a.quantized[i], QuantizeValue(a.embedding[i], a.quantizer));
  }
  const std::string csv = a.LossCsv();
  EXPECT_EQ(csv.rfind("step,t,loss\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 41);
}

TEST_F(TrainedModelTest, UtilityCheckReportsEqualEmbeddingsAsFail) {
  const Tensor x = SmallImages(1, 44)[0];
  Rng rng(3);
  const Tensor e = InitialEmbedding(*model_, rng);
  const UtilityReport same = EmbeddingUtilityCheck(*model_, x, e, e, 64, 5);
  EXPECT_EQ(same.learned_mean, same.random_mean);
  EXPECT_FALSE(same.pass);
  EXPECT_FALSE(same.high_variance);
  const UtilityReport one = EmbeddingUtilityCheck(*model_, x, e, e, 1, 5);
  EXPECT_TRUE(one.high_variance);
  EXPECT_EQ(one.trials, 1);
}

TEST_F(TrainedModelTest, LearnedEmbeddingBeatsItsStart) {
  const Tensor x = SmallImages(1, 45)[0];
  const InversionResult r = InvertEmbedding(*model_, x, {.steps = 500, .seed = 2});
  const UtilityReport vs_init = EmbeddingUtilityCheck(*model_, x, r.quantized, r.initial, 512, 77);
  EXPECT_TRUE(vs_init.pass) << vs_init.learned_mean << " vs " << vs_init.random_mean;
  EXPECT_NEAR(vs_init.relative_gap,
              (vs_init.random_mean - vs_init.learned_mean) / vs_init.random_mean, 1e-15);
}

}  // namespace
}  // namespace gicx
