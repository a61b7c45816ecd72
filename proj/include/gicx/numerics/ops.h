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

#ifndef GICX_NUMERICS_OPS_H_
#define GICX_NUMERICS_OPS_H_

#include "gicx/numerics/tensor.h"

namespace gicx {

// Differentiable primitives. Binary elementwise ops require equal shapes or a
// scalar right-hand side; there is no other broadcasting. Shape violations
// raise DimensionError.

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Add(const Tensor& a, double b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double s);
// d|u|/du is taken as 0 at u == 0.
Tensor Abs(const Tensor& a);
Tensor Silu(const Tensor& a);

Tensor Sum(const Tensor& a);
Tensor Mean(const Tensor& a);
// mean((a - b)^2)
Tensor MseLoss(const Tensor& a, const Tensor& b);

// [M x K] * [K x N] -> [M x N]
Tensor MatMul(const Tensor& a, const Tensor& b);

// Cross-correlation of a [C_in x H x W] input with a [C_out x C_in x k x k]
// kernel. `bias`, when non-empty, has C_out elements. Throws DimensionError
// unless (H + 2 padding - k) is a multiple of the stride.
Tensor Conv2d(const Tensor& input, const Tensor& kernel, int stride, int padding);
Tensor Conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int padding);

// Non-overlapping `factor` x `factor` mean pooling of a [C x H x W] tensor.
Tensor AvgPool2d(const Tensor& input, int factor);
// Nearest-neighbour upsampling of a [C x H x W] tensor.
Tensor UpsampleNearest(const Tensor& input, int factor);

// y[c, i] = x[c, i] * scale[c] + shift[c] for a [C x ...] tensor.
Tensor ChannelScaleShift(const Tensor& x, const Tensor& scale, const Tensor& shift);

// Normalizes each of `groups` contiguous channel groups of a [C x ...] tensor
// to zero mean and unit variance (biased, plus `epsilon`). No affine terms.
Tensor GroupNorm(const Tensor& x, int groups, double epsilon = 1e-5);

}  // namespace gicx

#endif  // GICX_NUMERICS_OPS_H_
