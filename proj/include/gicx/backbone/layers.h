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

#ifndef GICX_BACKBONE_LAYERS_H_
#define GICX_BACKBONE_LAYERS_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gicx/numerics/random.h"
#include "gicx/numerics/tensor.h"

namespace gicx {

// Ordered, named collection of trainable leaves. Order is creation order and
// is what checkpoints and optimizers see.
class ParameterSet {
 public:
  // Registers `value` as a gradient-tracking leaf and returns its handle.
  Tensor Add(const std::string& name, Tensor value);

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<Tensor> tensors() const;
  // Throws Error for an unknown name.
  const Tensor& at(const std::string& name) const;
  int64_t scalar_count() const;

  // Frozen parameters stop requiring gradients, so no graph is recorded for
  // them and an optimizer step cannot touch them.
  void SetTrainable(bool trainable);

  // FNV-1a over names and raw values.
  uint64_t Checksum() const;

  // Overwrites values in place from `source` (same names and shapes).
  void CopyValuesFrom(const std::vector<std::pair<std::string, Tensor>>& source);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

// y = x W + b for x of shape [M x in].
struct Linear {
  Tensor w;  // [in x out]
  Tensor b;  // [1 x out]
  Tensor operator()(const Tensor& x) const;
};

struct Conv {
  Tensor kernel;  // [out x in x k x k]
  Tensor bias;    // [out]
  int stride = 1;
  int padding = 0;
  Tensor operator()(const Tensor& x) const;
};

// Weights ~ N(0, gain^2 / fan_in); biases start at zero. gain = 0 gives an
// all-zero layer.
Linear MakeLinear(ParameterSet& params, const std::string& name, int in, int out, double gain,
                  Rng& rng);
Conv MakeConv(ParameterSet& params, const std::string& name, int in, int out, int kernel,
              int stride, int padding, double gain, Rng& rng);

// Rows of an [M x N] matrix averaged into [1 x N].
Tensor MeanRows(const Tensor& x);
// [1 x N] row repeated M times.
Tensor RepeatRows(const Tensor& row, int64_t m);

}  // namespace gicx

#endif  // GICX_BACKBONE_LAYERS_H_
