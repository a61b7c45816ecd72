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
#include <memory>

#include "gicx/numerics/errors.h"
#include "gicx/numerics/ops.h"
#include "gicx/numerics/optimizer.h"
#include "gicx/numerics/snapshot.h"
#include "test_util.h"

namespace gicx {
namespace {

using testing::FiniteDifferenceGradient;
using testing::RandomTensor;
using testing::RelativeError;
using testing::ToVector;

std::vector<double> Values(const Tensor& t) { return ToVector(t.data()); }

TEST(ElementwiseTest, AddScaleAbs) {
  EXPECT_EQ(Values(Add(Tensor({2}, {1, 2}), Tensor({2}, {3, 4}))), (std::vector<double>{4, 6}));
  EXPECT_EQ(Values(Scale(Tensor({2}, {1, 2}), 215.0)), (std::vector<double>{215, 430}));

  Tensor x({3}, {-2, 0, 3});
  x.set_requires_grad(true);
  Tensor y = Abs(x);
  EXPECT_EQ(Values(y), (std::vector<double>{2, 0, 3}));
  Backward(Sum(y));
  EXPECT_EQ(ToVector(x.grad()), (std::vector<double>{-1, 0, 1}));
}

TEST(ElementwiseTest, ScalarRightHandSide) {
  Tensor a({3}, {1, 2, 3});
  Tensor s = Tensor::Scalar(0.5);
  s.set_requires_grad(true);
  Backward(Sum(Add(a, s)));
  EXPECT_DOUBLE_EQ(s.grad()[0], 3.0);
  EXPECT_EQ(Values(Add(a, 1.0)), (std::vector<double>{2, 3, 4}));
}

TEST(ElementwiseTest, ShapeMismatchIsDimensionError) {
  EXPECT_THROW(Add(Tensor({2}, {1, 2}), Tensor({3}, {1, 2, 3})), DimensionError);
  EXPECT_THROW(Mul(Tensor({2, 1}, {1, 2}), Tensor({1, 2}, {1, 2})), DimensionError);
}

TEST(MatMulTest, Examples) {
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor m({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(Values(MatMul(eye, m)), Values(m));
  EXPECT_EQ(Values(MatMul(Tensor({1, 2}, {1, 0}), Tensor({2, 1}, {0, 1}))),
            (std::vector<double>{0}));
  EXPECT_THROW(MatMul(Tensor::Zeros({2, 3}), Tensor::Zeros({2, 3})), DimensionError);
}

TEST(MatMulTest, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  Tensor a = RandomTensor(rng, {4, 3});
  Tensor b = RandomTensor(rng, {3, 5});
  a.set_requires_grad(true);
  Backward(Sum(MatMul(a, b)));
  auto fd = FiniteDifferenceGradient(
      [&](const std::vector<double>& v) {
        NoGradGuard ng;
        return Sum(MatMul(Tensor({4, 3}, v), b)).item();
      },
      Values(a));
  EXPECT_LT(RelativeError(ToVector(a.grad()), fd), 1e-6);
}

TEST(MatMulTest, ResultDoesNotDependOnHeapPlacement) {
  Rng rng(11);
  for (Shape dims : {Shape{1, 8, 8}, Shape{2, 4, 4}, Shape{3, 7, 5}}) {
    const Tensor a = RandomTensor(rng, {dims[0], dims[1]});
    const Tensor b = RandomTensor(rng, {dims[1], dims[2]});
    const std::vector<double> ref = Values(MatMul(a, b));
    std::vector<std::vector<double>> pad;
    for (int shift = 1; shift < 16; ++shift) {
      pad.emplace_back(static_cast<std::size_t>(shift), 0.0);  // moves the next allocation
      Tensor a2({dims[0], dims[1]}, Values(a));
      Tensor b2({dims[1], dims[2]}, Values(b));
      EXPECT_EQ(Values(MatMul(a2, b2)), ref) << "shift " << shift;
    }
  }
}

TEST(Conv2dTest, PointwiseKernel) {
  Tensor out = Conv2d(Tensor::Full({1, 3, 3}, 1.0), Tensor::Full({1, 1, 1, 1}, 2.0), 1, 0);
  EXPECT_EQ(out.shape(), (Shape{1, 3, 3}));
  for (double v : out.data()) EXPECT_DOUBLE_EQ(v, 2.0);
}

TEST(Conv2dTest, AveragingKernelPreservesConstant) {
  const double c = 0.37;
  Tensor avg = Tensor::Full({1, 1, 3, 3}, 1.0 / 9.0);
  Tensor out = Conv2d(Tensor::Full({1, 3, 3}, c), avg, 1, 0);
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
  EXPECT_NEAR(out[0], c, 1e-15);
  Tensor big = Conv2d(Tensor::Full({1, 6, 6}, c), avg, 1, 1);
  EXPECT_NEAR(big[1 * 6 + 1], c, 1e-15);  // interior
  EXPECT_NEAR(big[2 * 6 + 3], c, 1e-15);
}

TEST(Conv2dTest, RejectsNonIntegralOutput) {
  EXPECT_THROW(Conv2d(Tensor::Zeros({1, 4, 4}), Tensor::Zeros({1, 1, 3, 3}), 2, 0),
               DimensionError);
  EXPECT_THROW(Conv2d(Tensor::Zeros({1, 5, 5}), Tensor::Zeros({1, 1, 4, 4}), 2, 1),
               DimensionError);
  EXPECT_THROW(Conv2d(Tensor::Zeros({1, 2, 2}), Tensor::Zeros({1, 1, 3, 3}), 1, 0),
               DimensionError);
  // Even kernels are fine when the geometry divides: 4x4, stride 2 halves.
  EXPECT_EQ(Conv2d(Tensor::Zeros({1, 6, 6}), Tensor::Zeros({2, 1, 4, 4}), 2, 1).shape(),
            (Shape{2, 3, 3}));
}

TEST(Conv2dTest, InputGradientMatchesFiniteDifferences) {
  Rng rng(11);
  Tensor x = RandomTensor(rng, {2, 8, 8});
  Tensor k = RandomTensor(rng, {4, 2, 3, 3});
  Tensor w = RandomTensor(rng, {4, 8, 8});
  x.set_requires_grad(true);
  Backward(Sum(Mul(Conv2d(x, k, 1, 1), w)));
  auto fd = FiniteDifferenceGradient(
      [&](const std::vector<double>& v) {
        NoGradGuard ng;
        return Sum(Mul(Conv2d(Tensor({2, 8, 8}, v), k, 1, 1), w)).item();
      },
      Values(x));
  EXPECT_LT(RelativeError(ToVector(x.grad()), fd), 1e-5);
}

TEST(BackwardTest, LinearAndQuadratic) {
  Tensor x({3}, {0.1, -4, 2});
  x.set_requires_grad(true);
  Backward(Sum(x));
  EXPECT_EQ(ToVector(x.grad()), (std::vector<double>{1, 1, 1}));

  Tensor y({2}, {1, 2});
  y.set_requires_grad(true);
  Backward(Sum(Mul(y, y)));
  EXPECT_EQ(ToVector(y.grad()), (std::vector<double>{2, 4}));
}

TEST(BackwardTest, NonScalarLossIsContractError) {
  Tensor x({2}, {1, 2});
  x.set_requires_grad(true);
  EXPECT_THROW(Backward(Scale(x, 2.0)), ContractError);
}

TEST(BackwardTest, DetachedLossLeavesGradientsAlone) {
  Tensor x({2}, {1, 2});
  x.set_requires_grad(true);
  Tensor loss = Sum(x.Detach());
  EXPECT_NO_THROW(Backward(loss));
  EXPECT_FALSE(x.has_grad());
}

TEST(BackwardTest, CompositeGraphMatchesFiniteDifferences) {
  Rng rng(3);
  Tensor x = RandomTensor(rng, {2, 6, 6});
  Tensor k = RandomTensor(rng, {3, 2, 3, 3});
  Tensor b = RandomTensor(rng, {3});
  Tensor target = RandomTensor(rng, {3, 6, 6});
  for (Tensor* t : {&x, &k, &b}) t->set_requires_grad(true);
  Backward(MseLoss(Silu(Conv2d(x, k, b, 1, 1)), target));

  auto loss_of = [&](const Tensor& xi, const Tensor& ki, const Tensor& bi) {
    NoGradGuard ng;
    return MseLoss(Silu(Conv2d(xi, ki, bi, 1, 1)), target).item();
  };
  auto fd_x = FiniteDifferenceGradient(
      [&](const std::vector<double>& v) { return loss_of(Tensor(x.shape(), v), k, b); },
      Values(x));
  auto fd_k = FiniteDifferenceGradient(
      [&](const std::vector<double>& v) { return loss_of(x, Tensor(k.shape(), v), b); },
      Values(k));
  auto fd_b = FiniteDifferenceGradient(
      [&](const std::vector<double>& v) { return loss_of(x, k, Tensor(b.shape(), v)); },
      Values(b));
  EXPECT_LT(RelativeError(ToVector(x.grad()), fd_x), 1e-4);
  EXPECT_LT(RelativeError(ToVector(k.grad()), fd_k), 1e-4);
  EXPECT_LT(RelativeError(ToVector(b.grad()), fd_b), 1e-4);
}

TEST(TapeTest, ReplaysReachableNodesOnceAndClears) {
  Tensor x({2}, {1, 2});
  x.set_requires_grad(true);
  Tensor a = Scale(x, 3.0);
  Tensor unused = Scale(x, 5.0);
  Tensor loss = Sum(Mul(a, a));
  EXPECT_EQ(Tape::Current().size(), 4u);
  EXPECT_EQ(Backward(loss), 3u);  // the unused branch is skipped
  EXPECT_EQ(Tape::Current().size(), 0u);
  EXPECT_EQ(ToVector(x.grad()), (std::vector<double>{18, 36}));
}

TEST(TapeTest, ClearReleasesNodes) {
  std::weak_ptr<TensorStorage> weak;
  {
    Tensor x({2}, {1, 2});
    x.set_requires_grad(true);
    weak = Scale(x, 2.0).storage();
  }
  EXPECT_FALSE(weak.expired());  // still held by the tape
  Tape::Current().Clear();
  EXPECT_TRUE(weak.expired());
}

TEST(TapeTest, NoGradGuardSuppressesRecording) {
  Tensor x({2}, {1, 2});
  x.set_requires_grad(true);
  NoGradGuard ng;
  Tensor y = Scale(x, 2.0);
  EXPECT_FALSE(y.requires_grad());
  EXPECT_EQ(Tape::Current().size(), 0u);
}

TEST(TensorTest, RejectsNonFiniteValues) {
  EXPECT_THROW(Tensor({1}, {std::nan("")}), NumericError);
  EXPECT_THROW(Scale(Tensor({1}, {1e300}), 1e300), NumericError);
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), DimensionError);
}

TEST(AdamTest, SingleStepDescends) {
  Tensor w({1}, {1.0});
  Adam opt({w}, {.learning_rate = 0.1});
  Backward(Sum(Mul(w, w)));
  opt.Step();
  EXPECT_LT(w[0], 1.0);
  EXPECT_EQ(w.grad()[0], 0.0);
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(AdamTest, ZeroGradientIsFixedPoint) {
  Tensor w({3}, {0.5, -1, 2});
  Adam opt({w}, {.learning_rate = 0.1});
  w.ZeroGrad();
  opt.Step();
  EXPECT_EQ(Values(w), (std::vector<double>{0.5, -1, 2}));
}

TEST(AdamTest, MissingGradientIsContractError) {
  Tensor w({1}, {1.0});
  Adam opt({w}, {});
  EXPECT_THROW(opt.Step(), ContractError);
}

TEST(AdamTest, ConvexQuadraticMatchesScalarRecurrence) {
  // Oracle: the textbook recurrence run on a plain double.
  double ref = 5.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 200; ++t) {
    const double g = 2.0 * ref;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    ref -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }

  Tensor w({1}, {5.0});
  Adam opt({w}, {.learning_rate = 0.1});
  for (int t = 0; t < 200; ++t) {
    Backward(Sum(Mul(w, w)));
    opt.Step();
  }
  EXPECT_EQ(opt.step_count(), 200);
  EXPECT_NEAR(w[0], ref, 1e-12);
  EXPECT_LT(std::abs(w[0]), 1e-2);
}

TEST(GroupNormTest, NormalizesEachGroup) {
  Rng rng(4);
  const Tensor x = Add(Scale(RandomTensor(rng, {4, 3, 3}), 5.0), 2.0);
  const Tensor y = GroupNorm(x, 2, 1e-12);
  for (int g = 0; g < 2; ++g) {
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < 18; ++i) {
      mean += y[g * 18 + i];
      sq += y[g * 18 + i] * y[g * 18 + i];
    }
    EXPECT_NEAR(mean / 18, 0.0, 1e-12);
    EXPECT_NEAR(sq / 18, 1.0, 1e-9);
  }
  EXPECT_THROW(GroupNorm(x, 3), ParameterError);
  EXPECT_THROW(GroupNorm(x, 2, 0.0), ParameterError);
}

// Property: analytic gradients of every primitive agree with central finite
// differences on random inputs in [-1, 1] over 50 seeds.
TEST(GradientPropertyTest, EveryPrimitiveAgreesWithFiniteDifferences) {
  struct Case {
    const char* name;
    std::function<Tensor(const Tensor&, const Tensor&)> op;
    Shape shape_a, shape_b;
  };
  const std::vector<Case> cases = {
      {"add", [](auto& a, auto& b) { return Add(a, b); }, {5}, {5}},
      {"sub", [](auto& a, auto& b) { return Sub(a, b); }, {5}, {5}},
      {"mul", [](auto& a, auto& b) { return Mul(a, b); }, {5}, {5}},
      {"scale", [](auto& a, auto&) { return Scale(a, -1.7); }, {5}, {1}},
      {"abs", [](auto& a, auto&) { return Abs(a); }, {5}, {1}},
      {"silu", [](auto& a, auto&) { return Silu(a); }, {5}, {1}},
      {"mean", [](auto& a, auto&) { return Mean(a); }, {5}, {1}},
      {"mse", [](auto& a, auto& b) { return MseLoss(a, b); }, {5}, {5}},
      {"matmul", [](auto& a, auto& b) { return MatMul(a, b); }, {3, 4}, {4, 2}},
      {"conv_s1", [](auto& a, auto& b) { return Conv2d(a, b, 1, 1); }, {2, 5, 5}, {3, 2, 3, 3}},
      {"conv_s2", [](auto& a, auto& b) { return Conv2d(a, b, 2, 1); }, {2, 7, 7}, {2, 2, 3, 3}},
      {"conv_k4_s2", [](auto& a, auto& b) { return Conv2d(a, b, 2, 1); }, {2, 6, 6}, {3, 2, 4, 4}},
      {"avgpool", [](auto& a, auto&) { return AvgPool2d(a, 2); }, {2, 4, 4}, {1}},
      {"upsample", [](auto& a, auto&) { return UpsampleNearest(a, 2); }, {2, 2, 3}, {1}},
      {"film",
       [](auto& a, auto& b) {
         return ChannelScaleShift(a, b.Reshape({2, 2}).Reshape({4}).Reshape({2, 2}).Reshape({4}),
                                  Scale(b, 0.5));
       },
       {4, 3}, {4}},
      {"reshape", [](auto& a, auto&) { return a.Reshape({6, 2}); }, {3, 4}, {1}},
      {"groupnorm", [](auto& a, auto&) { return GroupNorm(a, 2); }, {4, 2, 3}, {1}},
  };
  for (const Case& c : cases) {
    for (uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(seed * 977 + 13);
      Tensor a = RandomTensor(rng, c.shape_a);
      Tensor b = RandomTensor(rng, c.shape_b);
      Tensor proj = RandomTensor(rng, c.op(a, b).shape());
      Tape::Current().Clear();
      a.set_requires_grad(true);
      b.set_requires_grad(true);
      Backward(Sum(Mul(c.op(a, b), proj)));
      auto loss = [&](const Tensor& ai, const Tensor& bi) {
        NoGradGuard ng;
        return Sum(Mul(c.op(ai, bi), proj)).item();
      };
      auto fd_a = FiniteDifferenceGradient(
          [&](const std::vector<double>& v) { return loss(Tensor(c.shape_a, v), b); }, Values(a));
      auto fd_b = FiniteDifferenceGradient(
          [&](const std::vector<double>& v) { return loss(a, Tensor(c.shape_b, v)); }, Values(b));
      auto ga = a.has_grad() ? ToVector(a.grad()) : std::vector<double>(fd_a.size(), 0.0);
      auto gb = b.has_grad() ? ToVector(b.grad()) : std::vector<double>(fd_b.size(), 0.0);
      EXPECT_LT(RelativeError(ga, fd_a, 1e-8), 1e-4) << c.name << " seed " << seed;
      EXPECT_LT(RelativeError(gb, fd_b, 1e-8), 1e-4) << c.name << " seed " << seed;
    }
  }
}

TEST(GradientPropertyTest, ReplayIsBitIdentical) {
  auto run = [] {
    Rng rng(99);
    Tensor x = RandomTensor(rng, {2, 6, 6});
    Tensor k = RandomTensor(rng, {3, 2, 3, 3});
    k.set_requires_grad(true);
    x.set_requires_grad(true);
    Backward(Mean(Abs(Silu(Conv2d(x, k, 1, 1)))));
    auto g = ToVector(k.grad());
    auto gx = ToVector(x.grad());
    g.insert(g.end(), gx.begin(), gx.end());
    return g;
  };
  EXPECT_EQ(run(), run());
}

TEST(LinearityPropertyTest, LinearOpsAreAdditive) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor a = RandomTensor(rng, {2, 6, 6});
    Tensor b = RandomTensor(rng, {2, 6, 6});
    Tensor k = RandomTensor(rng, {3, 2, 3, 3});
    auto lhs = Conv2d(Add(a, b), k, 1, 1);
    auto rhs = Add(Conv2d(a, k, 1, 1), Conv2d(b, k, 1, 1));
    EXPECT_LT(RelativeError(Values(lhs), Values(rhs), 1.0), 1e-12);

    Tensor m1 = RandomTensor(rng, {3, 4}), m2 = RandomTensor(rng, {3, 4});
    Tensor r = RandomTensor(rng, {4, 5});
    EXPECT_LT(RelativeError(Values(MatMul(Add(m1, m2), r)),
                            Values(Add(MatMul(m1, r), MatMul(m2, r))), 1.0),
              1e-12);
    EXPECT_LT(RelativeError(Values(Scale(Add(a, b), 3.5)),
                            Values(Add(Scale(a, 3.5), Scale(b, 3.5))), 1.0),
              1e-12);
  }
}

TEST(SnapshotTest, RoundTripAndBadMagic) {
  Rng rng(1);
  Tensor t = RandomTensor(rng, {2, 3, 4});
  auto bytes = EncodeSnapshot(t);
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 3 * 8 + 24 * 8);
  Tensor back = DecodeSnapshot(bytes);
  EXPECT_EQ(back.shape(), t.shape());
  EXPECT_EQ(Values(back), Values(t));
  bytes[0] = 'X';
  EXPECT_THROW(DecodeSnapshot(bytes), FormatError);
  auto truncated = EncodeSnapshot(t);
  truncated.resize(truncated.size() - 3);
  EXPECT_THROW(DecodeSnapshot(truncated), FormatError);
}

}  // namespace
}  // namespace gicx
